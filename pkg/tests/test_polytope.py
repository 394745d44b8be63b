import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cicc import simplex
from cicc.errors import DimensionMismatch, ParseError, UnknownVariable, VariableMismatch
from cicc.polytope import (
    Inequality,
    LinearSystem,
    canonicalize,
    equivalent,
    fm_eliminate,
    implies,
    is_redundant,
    prune,
    rationalize,
)

small = st.integers(-4, 4)


def sys_of(variables, rows):
    s = LinearSystem(tuple(variables))
    for coeffs, rhs in rows:
        s = s.le(dict(zip(variables, coeffs)), rhs)
    return s


def vertex_max(c, rows):
    """Brute-force 2-D LP: best objective over pairwise constraint intersections."""
    best = None
    for (a1, b1), (a2, b2) in itertools.combinations(rows, 2):
        det = a1[0] * a2[1] - a1[1] * a2[0]
        if det == 0:
            continue
        x = Fraction(b1 * a2[1] - b2 * a1[1], det)
        y = Fraction(a1[0] * b2 - a2[0] * b1, det)
        if all(a[0] * x + a[1] * y <= b for a, b in rows):
            v = c[0] * x + c[1] * y
            best = v if best is None else max(best, v)
    return best


@given(st.lists(st.tuples(st.tuples(small, small), small), max_size=5), st.tuples(small, small))
@settings(max_examples=200, deadline=None)
def test_simplex_matches_vertex_enumeration(rows, c):
    box = [((1, 0), 10), ((-1, 0), 10), ((0, 1), 10), ((0, -1), 10)]
    rows = rows + box
    res = simplex.maximize(c, [r[0] for r in rows], [r[1] for r in rows])
    want = vertex_max(c, rows)
    if want is None:
        assert res.status == simplex.INFEASIBLE
    else:
        assert res.status == simplex.OPTIMAL and res.value == want
        assert all(a[0] * res.x[0] + a[1] * res.x[1] <= b for a, b in rows)


def test_simplex_unbounded_and_nonneg():
    assert simplex.maximize([1], [[-1]], [0]).status == simplex.UNBOUNDED
    res = simplex.maximize([-1, -1], [[-1, -1]], [-3], nonneg=[True, True])
    assert res.status == simplex.OPTIMAL and res.value == -3
    assert simplex.maximize([0], [[1], [-1]], [-1, 0]).status == simplex.INFEASIBLE


def test_simplex_degenerate_cycling_example():
    # a classic cycling instance under the largest-coefficient rule
    c = [10, -57, -9, -24]
    A = [[0.5, -5.5, -2.5, 9], [0.5, -1.5, -0.5, 1], [1, 0, 0, 0]]
    A = [[Fraction(x) for x in r] for r in A]
    res = simplex.maximize(c, A, [0, 0, 1], nonneg=[True] * 4)
    assert res.status == simplex.OPTIMAL and res.value == 1


def test_canonicalize_examples():
    s = sys_of("x", [((2,), 4)])
    assert canonicalize(s).rows[0].key == ((1,), 2)
    s = sys_of("x", [((1,), 1), ((1,), 1)])
    assert len(canonicalize(s)) == 1
    s = sys_of("xy", [((3, 6), 9)])
    assert canonicalize(s).rows[0].key == ((1, 2), 3)


def test_canonicalize_drops_tautologies_keeps_contradictions():
    s = sys_of("x", [((0,), 1), ((0,), -1)])
    out = canonicalize(s)
    assert len(out) == 1 and out.rows[0].rhs < 0


@given(st.lists(st.tuples(st.tuples(small, small), small), max_size=6))
@settings(max_examples=100, deadline=None)
def test_canonicalize_idempotent(rows):
    s = canonicalize(sys_of("xy", rows))
    assert canonicalize(s) == s


def test_fm_examples():
    s = sys_of("xy", [((1, 1), 1), ((0, -1), 0)])
    out = fm_eliminate(s, "y")
    assert out.variables == ("x",) and [r.key for r in out.rows] == [((1,), 1)]
    out = fm_eliminate(sys_of("y", [((1,), 3)]), "y")
    assert len(out) == 0
    with pytest.raises(UnknownVariable):
        fm_eliminate(s, "z")


grid = [Fraction(k, 2) for k in range(-6, 7)]


@given(st.lists(st.tuples(st.tuples(small, small, small), small), min_size=1, max_size=5))
@settings(max_examples=40, deadline=None)
def test_fm_matches_grid_projection(rows):
    """Projection membership agrees with feasibility of the exact 1-D fiber."""
    box = [((1, 0, 0), 3), ((-1, 0, 0), 3), ((0, 1, 0), 3), ((0, -1, 0), 3),
           ((0, 0, 1), 3), ((0, 0, -1), 3)]
    s = sys_of("xyz", rows + box)
    proj = fm_eliminate(s, "z")
    for x, y in itertools.product(grid, repeat=2):
        lo, hi = Fraction(-10**9), Fraction(10**9)
        ok = True
        for (a, b, c), rhs in rows + box:
            rest = rhs - a * x - b * y
            if c > 0:
                hi = min(hi, rest / c)
            elif c < 0:
                lo = max(lo, rest / c)
            elif rest < 0:
                ok = False
        assert proj.contains((x, y)) == (ok and lo <= hi)


def test_redundancy_examples():
    s = sys_of("x", [((1,), 1)])
    assert is_redundant(s, s.row({"x": 1}, 2))
    assert not is_redundant(s, s.row({"x": 1}, Fraction(1, 2)))
    with pytest.raises(DimensionMismatch):
        is_redundant(s, Inequality((Fraction(1), Fraction(1)), Fraction(0)))


@given(st.fractions(0, 50), st.fractions(0, 50))
@settings(max_examples=50, deadline=None)
def test_sum_of_two_rows_is_redundant(a, b):
    s = LinearSystem(("r0", "rs")).le({"r0": 1}, a).le({"rs": 1}, b)
    assert is_redundant(s, s.row({"r0": 1, "rs": 1}, a + b))
    assert not is_redundant(s, s.row({"r0": 1, "rs": 1}, a + b - Fraction(1, 10**6)))


def test_redundancy_unbounded_and_empty():
    s = sys_of("x", [((1,), 1)])
    assert not is_redundant(s, s.row({"x": -1}, 0))
    empty = sys_of("x", [((1,), -1), ((-1,), 0)])
    assert is_redundant(empty, empty.row({"x": 1}, -100))


def test_equivalence_examples():
    a = sys_of("x", [((1,), 1)])
    assert equivalent(a, a)
    assert equivalent(a, sys_of("x", [((1,), 1), ((1,), 2)]))
    assert not equivalent(a, sys_of("x", [((1,), Fraction(9, 10))]))
    with pytest.raises(VariableMismatch):
        equivalent(a, sys_of("y", [((1,), 1)]))


@given(st.lists(st.tuples(st.tuples(small, small), small), min_size=1, max_size=5),
       st.randoms(use_true_random=False), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_equivalence_invariances(rows, rnd, k):
    a = sys_of("xy", rows)
    shuffled = list(a.rows)
    rnd.shuffle(shuffled)
    scaled = [Inequality(tuple(c * k for c in r.coeffs), r.rhs * k) for r in shuffled]
    b = LinearSystem(a.variables, tuple(scaled))
    assert equivalent(a, b) and equivalent(b, a)
    assert equivalent(a, a.reorder(("y", "x")))


@given(st.lists(st.tuples(st.tuples(small, small), small), min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_prune_preserves_region(rows):
    s = sys_of("xy", rows)
    p = prune(s)
    assert len(p) <= len(s)
    assert equivalent(s, p)


def test_implies_direction():
    inner = sys_of("x", [((1,), 1), ((-1,), 0)])
    outer = sys_of("x", [((1,), 2), ((-1,), 0)])
    assert implies(inner, outer) and not implies(outer, inner)


def test_text_roundtrip():
    s = LinearSystem(("a", "b")).le({"a": Fraction(1, 3), "b": -2}, Fraction(7, 5), "t1")
    s = s.nonnegative()
    back = LinearSystem.from_text(s.to_text())
    assert back == s and [r.tag for r in back.rows] == [r.tag for r in s.rows]
    with pytest.raises(ParseError):
        LinearSystem.from_text("1*a <= 2")
    with pytest.raises(ParseError):
        LinearSystem.from_text("variables: a\n1*b <= 2")


def test_rationalize_grid():
    assert rationalize(0.1) == Fraction(1, 10)
    assert rationalize(1 / 3).denominator <= 10**12
    assert abs(rationalize(2**-0.5) - Fraction(2**-0.5)) <= Fraction(1, 2 * 10**12)

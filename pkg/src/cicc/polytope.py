"""Exact-rational linear inequality systems.

A :class:`LinearSystem` is a list of ``a.x <= b`` rows over named
variables with :class:`~fractions.Fraction` data.  This module provides
canonical forms, Fourier-Motzkin elimination, LP-based redundancy and
equivalence tests, and a line-oriented text serialization.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import simplex
from .errors import DimensionMismatch, ParseError, UnknownVariable, VariableMismatch

RATIONAL_GRID = 10**12


def rationalize(x: float, grid: int = RATIONAL_GRID) -> Fraction:
    """Nearest multiple of ``1/grid`` to the exact binary value of ``x``."""
    return Fraction(round(Fraction(x) * grid), grid)


@dataclass(frozen=True)
class Inequality:
    """``sum(coeffs[i] * var[i]) <= rhs``; ``tag`` records provenance."""

    coeffs: tuple[Fraction, ...]
    rhs: Fraction
    tag: str = field(default="", compare=False)

    @property
    def key(self):
        return (self.coeffs, self.rhs)

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def holds(self, point: Sequence) -> bool:
        return sum(c * x for c, x in zip(self.coeffs, point) if c) <= self.rhs

    def scaled(self) -> Inequality:
        """Positive rescaling to coprime integer coefficients."""
        if self.is_trivial():
            rhs = Fraction(0) if self.rhs >= 0 else Fraction(-1)
            return Inequality(self.coeffs, rhs, self.tag)
        lcm = math.lcm(*(c.denominator for c in self.coeffs if c))
        ints = [int(c * lcm) for c in self.coeffs]
        g = math.gcd(*ints)
        f = Fraction(lcm, g)
        return Inequality(tuple(Fraction(i // g) for i in ints), self.rhs * f, self.tag)


def _frac(v) -> Fraction:
    if isinstance(v, float):
        return rationalize(v)
    return Fraction(v)


@dataclass(frozen=True)
class LinearSystem:
    variables: tuple[str, ...]
    rows: tuple[Inequality, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(set(self.variables)) != len(self.variables):
            raise VariableMismatch(f"duplicate variable names: {self.variables}")
        for r in self.rows:
            if len(r.coeffs) != len(self.variables):
                raise DimensionMismatch(
                    f"row has {len(r.coeffs)} coefficients, system has "
                    f"{len(self.variables)} variables"
                )

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    # -- construction -----------------------------------------------------

    def row(self, coeffs: Mapping[str, object], rhs, tag: str = "") -> Inequality:
        """``sum coeffs[v] * v <= rhs`` over this system's variables."""
        for name in coeffs:
            if name not in self.variables:
                raise UnknownVariable(f"{name!r} not in {self.variables}")
        vec = tuple(_frac(coeffs.get(v, 0)) for v in self.variables)
        return Inequality(vec, _frac(rhs), tag)

    def le(self, coeffs, rhs, tag="") -> LinearSystem:
        return self.with_rows([self.row(coeffs, rhs, tag)])

    def ge(self, coeffs, rhs, tag="") -> LinearSystem:
        neg = {k: -_frac(v) for k, v in coeffs.items()}
        return self.with_rows([self.row(neg, -_frac(rhs), tag)])

    def nonnegative(self, names: Iterable[str] | None = None) -> LinearSystem:
        names = self.variables if names is None else names
        return self.with_rows(self.row({v: -1}, 0, f"{v}>=0") for v in names)

    def with_rows(self, rows: Iterable[Inequality]) -> LinearSystem:
        return LinearSystem(self.variables, self.rows + tuple(rows))

    def reorder(self, variables: Sequence[str]) -> LinearSystem:
        """Same system with columns permuted to ``variables``."""
        if sorted(variables) != sorted(self.variables):
            raise VariableMismatch(f"{tuple(variables)} vs {self.variables}")
        perm = [self.variables.index(v) for v in variables]
        rows = (
            Inequality(tuple(r.coeffs[i] for i in perm), r.rhs, r.tag)
            for r in self.rows
        )
        return LinearSystem(tuple(variables), tuple(rows))

    def index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise UnknownVariable(f"{var!r} not in {self.variables}") from None

    # -- queries ----------------------------------------------------------

    def contains(self, point: Sequence) -> bool:
        pt = [_frac(x) for x in point]
        if len(pt) != len(self.variables):
            raise DimensionMismatch("point dimension differs from system")
        return all(r.holds(pt) for r in self.rows)

    def nonneg_mask(self) -> list[bool]:
        """Variables pinned nonnegative by some single-variable row."""
        mask = [False] * len(self.variables)
        for r in self.rows:
            nz = [i for i, c in enumerate(r.coeffs) if c]
            if len(nz) == 1 and r.coeffs[nz[0]] < 0 and r.rhs <= 0:
                mask[nz[0]] = True
        return mask

    def maximize(self, objective: Sequence) -> simplex.LPResult:
        obj = [_frac(c) for c in objective]
        if len(obj) != len(self.variables):
            raise DimensionMismatch("objective dimension differs from system")
        A = [r.coeffs for r in self.rows]
        b = [r.rhs for r in self.rows]
        return simplex.maximize(obj, A, b, self.nonneg_mask())

    def is_feasible(self) -> bool:
        return self.maximize([0] * len(self.variables)).status != simplex.INFEASIBLE

    # -- text form --------------------------------------------------------

    def to_text(self) -> str:
        lines = ["variables: " + " ".join(self.variables)]
        for r in self.rows:
            terms = [f"{c}*{v}" for c, v in zip(r.coeffs, self.variables) if c]
            line = f"{' + '.join(terms) or '0'} <= {r.rhs}"
            if r.tag:
                line += f"  # {r.tag}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> LinearSystem:
        variables = None
        rows = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            body, _, tag = raw.partition("#")
            body, tag = body.strip(), tag.strip()
            if not body:
                continue
            if body.startswith("variables:"):
                variables = tuple(body.split(":", 1)[1].split())
                continue
            if variables is None:
                raise ParseError("missing 'variables:' header", lineno)
            if "<=" not in body:
                raise ParseError("expected '<='", lineno)
            lhs, rhs = body.split("<=")
            coeffs = {}
            if lhs.strip() != "0":
                for term in lhs.split(" + "):
                    m = re.fullmatch(r"\s*(-?\d+(?:/\d+)?)\*(\w+)\s*", term)
                    if not m:
                        raise ParseError(f"bad term {term.strip()!r}", lineno)
                    if m.group(2) not in variables:
                        raise ParseError(f"unknown variable {m.group(2)!r}", lineno)
                    coeffs[m.group(2)] = Fraction(m.group(1))
            try:
                b = Fraction(rhs.strip())
            except ValueError:
                raise ParseError(f"bad right-hand side {rhs.strip()!r}", lineno) from None
            vec = tuple(coeffs.get(v, Fraction(0)) for v in variables)
            rows.append(Inequality(vec, b, tag))
        if variables is None:
            raise ParseError("missing 'variables:' header")
        return cls(variables, tuple(rows))


def canonicalize(sys: LinearSystem) -> LinearSystem:
    """Coprime-integer rows, tautologies and exact duplicates removed, sorted.

    Rows are only ever scaled by positive factors, so the sign of each
    coefficient is preserved.  The first tag seen for a duplicate wins.
    """
    seen = {}
    for r in sys.rows:
        s = r.scaled()
        if s.is_trivial() and s.rhs >= 0:
            continue
        seen.setdefault(s.key, s)
    rows = [seen[k] for k in sorted(seen)]
    return LinearSystem(sys.variables, tuple(rows))


def fm_eliminate(sys: LinearSystem, var: str) -> LinearSystem:
    """Project ``var`` out by pairing every upper bound with every lower bound."""
    k = sys.index(var)
    keep = [i for i in range(len(sys.variables)) if i != k]
    variables = tuple(sys.variables[i] for i in keep)
    zero, upper, lower = [], [], []
    for r in sys.rows:
        c = r.coeffs[k]
        (upper if c > 0 else lower if c < 0 else zero).append(r)
    out = [Inequality(tuple(r.coeffs[i] for i in keep), r.rhs, r.tag) for r in zero]
    for p in upper:
        for q in lower:
            a, b = p.coeffs[k], -q.coeffs[k]
            coeffs = tuple(b * p.coeffs[i] + a * q.coeffs[i] for i in keep)
            out.append(Inequality(coeffs, b * p.rhs + a * q.rhs, f"({p.tag})+({q.tag})"))
    return canonicalize(LinearSystem(variables, tuple(out)))


def _dominated(sys: LinearSystem, ineq: Inequality) -> bool:
    s = ineq.scaled()
    for r in sys.rows:
        t = r.scaled()
        if t.coeffs == s.coeffs and t.rhs <= s.rhs:
            return True
    return False


def is_redundant(sys: LinearSystem, ineq: Inequality) -> bool:
    """True iff every point of ``sys`` satisfies ``ineq`` (empty sys counts)."""
    if len(ineq.coeffs) != len(sys.variables):
        raise DimensionMismatch(
            f"inequality has {len(ineq.coeffs)} coefficients, system has "
            f"{len(sys.variables)} variables"
        )
    if ineq.is_trivial() and ineq.rhs >= 0:
        return True
    if _dominated(sys, ineq):
        return True
    # rescale right-hand sides to integers; the LP is homogeneous in them
    scale = math.lcm(ineq.rhs.denominator, *(r.rhs.denominator for r in sys.rows))
    A = [r.coeffs for r in sys.rows]
    b = [r.rhs * scale for r in sys.rows]
    res = simplex.maximize(ineq.coeffs, A, b, sys.nonneg_mask())
    if res.status == simplex.INFEASIBLE:
        return True
    if res.status == simplex.UNBOUNDED:
        return False
    return res.value <= ineq.rhs * scale


def implies(a: LinearSystem, b: LinearSystem) -> bool:
    """True iff the region of ``a`` lies inside the region of ``b``."""
    if a.variables != b.variables:
        b = b.reorder(a.variables)
    return all(is_redundant(a, r) for r in b.rows)


def equivalent(a: LinearSystem, b: LinearSystem) -> bool:
    """Mutual implication of two systems over the same variable set."""
    if set(a.variables) != set(b.variables):
        raise VariableMismatch(f"{a.variables} vs {b.variables}")
    return implies(a, b) and implies(b, a)


def prune(sys: LinearSystem, lp: bool = True) -> LinearSystem:
    """Drop dominated rows and, with ``lp``, rows implied by the others."""
    rows = list(canonicalize(sys).rows)
    best = {}
    for r in rows:
        if r.coeffs not in best or r.rhs < best[r.coeffs].rhs:
            best[r.coeffs] = r
    rows = [r for r in rows if best[r.coeffs] is r]
    if lp:
        i = 0
        while i < len(rows):
            others = LinearSystem(sys.variables, tuple(rows[:i] + rows[i + 1 :]))
            if is_redundant(others, rows[i]):
                del rows[i]
            else:
                i += 1
    return LinearSystem(sys.variables, tuple(rows))

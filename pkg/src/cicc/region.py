"""Rate-region inequality systems built from an input design.

The constants of every system are information quantities of the joint
law of (U, V, X1, X2, Y, Z).  They are converted to exact rationals on a
1e-12 grid before any system is built, so all downstream polytope work
is exact.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import simplex
from .errors import BadBudget, VariableMismatch, WorkbenchError
from .parallel import pmap
from .polytope import Inequality, LinearSystem, rationalize
from .prob import (
    IDENTITY_TOL,
    Channel,
    InputDesign,
    build_joint,
    cond_mutual_info,
    random_channel,
    random_design,
    random_simplex,
)

RATES = ("rd", "r0", "r1", "rs")
SLACKS = ("r1s", "rds", "rss")

# tolerance for recognising a chain-rule identity among float inputs
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class InfoVector:
    """The eight information quantities (nats) that parametrize the region."""

    iuxy: float  # I(U,X2;Y)
    iuxz: float  # I(U,X2;Z)
    iuvy_x2: float  # I(U,V;Y|X2)
    ivy_ux2: float  # I(V;Y|U,X2)
    ivz_ux2: float  # I(V;Z|U,X2)
    iuvxy: float  # I(U,V,X2;Y)
    ix1z_ux2: float  # I(X1;Z|U,X2)
    ix1z_uvx2: float  # I(X1;Z|U,V,X2)

    @classmethod
    def zeros(cls) -> InfoVector:
        return cls(*([0.0] * 8))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def violations(self, tol: float = IDENTITY_TOL) -> list[str]:
        """Invariant failures; an empty list means the vector is consistent."""
        out = [f"{k} < 0" for k, v in self.as_dict().items() if v < -tol]
        if self.iuvy_x2 < self.ivy_ux2 - tol:
            out.append("iuvy_x2 < ivy_ux2")
        if self.ix1z_ux2 < self.ix1z_uvx2 + self.ivz_ux2 - tol:
            out.append("ix1z_ux2 < ix1z_uvx2 + ivz_ux2")
        return out


@dataclass(frozen=True)
class RateQuadruple:
    rd: float
    r0: float
    r1: float
    rs: float

    def __post_init__(self):
        if min(astuple(self)) < 0:
            raise WorkbenchError(f"rates must be nonnegative: {astuple(self)}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return astuple(self)


def info_vector(design: InputDesign, py: Channel, pz: Channel) -> InfoVector:
    j = build_joint(design, py, pz)
    mi = lambda a, b, c=(): max(cond_mutual_info(j, a, b, c), 0.0)  # noqa: E731
    return InfoVector(
        iuxy=mi(("U", "X2"), "Y"),
        iuxz=mi(("U", "X2"), "Z"),
        iuvy_x2=mi(("U", "V"), "Y", "X2"),
        ivy_ux2=mi("V", "Y", ("U", "X2")),
        ivz_ux2=mi("V", "Z", ("U", "X2")),
        iuvxy=mi(("U", "V", "X2"), "Y"),
        ix1z_ux2=mi("X1", "Z", ("U", "X2")),
        ix1z_uvx2=mi("X1", "Z", ("U", "V", "X2")),
    )


def exact_constants(iv: InfoVector) -> dict[str, Fraction]:
    """Rational constants with the chain-rule identities made exact.

    The five atomic quantities are rounded independently.  When the float
    vector satisfies an identity to within ``SNAP_TOL`` the derived
    quantity is rebuilt as the exact rational sum:

    - I(U,V;Y|X2) = I(V;Y|U,X2) + I(U;Y|X2)
    - I(U,V,X2;Y) = I(U,X2;Y) + I(V;Y|U,X2)
    - I(X1;Z|U,X2) = I(V;Z|U,X2) + I(X1;Z|U,V,X2)

    Otherwise the derived quantity is rounded on its own.
    """
    q = {k: rationalize(v) for k, v in iv.as_dict().items()}
    iuy_x2 = iv.iuvy_x2 - iv.ivy_ux2
    if iuy_x2 >= -SNAP_TOL:
        q["iuvy_x2"] = q["ivy_ux2"] + rationalize(max(iuy_x2, 0.0))
    if abs(iv.iuvxy - iv.iuxy - iv.ivy_ux2) <= SNAP_TOL:
        q["iuvxy"] = q["iuxy"] + q["ivy_ux2"]
    if abs(iv.ix1z_ux2 - iv.ivz_ux2 - iv.ix1z_uvx2) <= SNAP_TOL:
        q["ix1z_ux2"] = q["ivz_ux2"] + q["ix1z_uvx2"]
    return q


def capacity_region(iv: InfoVector) -> LinearSystem:
    """The six capacity-region inequalities plus nonnegativity of the rates."""
    q = exact_constants(iv)
    m = min(q["iuxy"], q["iuxz"])
    s = LinearSystem(RATES)
    s = s.le({"r0": 1}, m, "common")
    s = s.le({"r1": 1, "rs": 1}, q["iuvy_x2"], "private")
    s = s.le({"r0": 1, "r1": 1, "rs": 1}, q["ivy_ux2"] + m, "sum-rate")
    s = s.le({"rs": 1}, q["ivy_ux2"] - q["ivz_ux2"], "secrecy")
    s = s.ge({"r1": 1, "rd": 1}, q["ix1z_ux2"], "randomness-outer")
    s = s.ge({"rd": 1}, q["ix1z_uvx2"], "randomness")
    return s.nonnegative()


def relaxed_region(iv: InfoVector) -> LinearSystem:
    """Capacity region without the two-layer randomness row ``r1 + rd >= I(X1;Z|U,X2)``."""
    s = capacity_region(iv)
    return LinearSystem(s.variables, tuple(r for r in s.rows if r.tag != "randomness-outer"))


def project_no_randomness(iv: InfoVector) -> LinearSystem:
    """Region over (r0, r1, rs) when dummy randomness is unconstrained."""
    q = exact_constants(iv)
    m = min(q["iuxy"], q["iuxz"])
    s = LinearSystem(("r0", "r1", "rs"))
    s = s.le({"r0": 1}, m, "common")
    s = s.le({"r1": 1, "rs": 1}, q["iuvy_x2"], "private")
    s = s.le({"r0": 1, "r1": 1, "rs": 1}, q["ivy_ux2"] + m, "sum-rate")
    s = s.le({"rs": 1}, q["ivy_ux2"] - q["ivz_ux2"], "secrecy")
    return s.nonnegative()


def split_system(iv: InfoVector) -> LinearSystem:
    """Inner-bound system with one slack ``r1s`` (the split of the private rate)."""
    q = exact_constants(iv)
    s = LinearSystem(RATES + ("r1s",))
    s = s.le({"r0": 1, "r1s": 1}, q["iuxz"], "eve-common")
    s = s.le({"r1": 1, "r1s": -1, "rs": 1}, q["ivy_ux2"], "bob-cloud")
    s = s.le({"r1": 1, "rs": 1}, q["iuvy_x2"], "bob-private")
    s = s.le({"r0": 1, "r1": 1, "rs": 1}, q["iuvxy"], "bob-all")
    s = s.ge({"r1": 1, "r1s": -1}, q["ivz_ux2"], "eve-confusion")
    s = s.ge({"rd": 1}, q["ix1z_uvx2"], "randomness")
    return s.nonnegative()


def slack_system(iv: InfoVector) -> LinearSystem:
    """Inner-bound system with slacks (r1s, rds, rss) for rate trading."""
    q = exact_constants(iv)
    s = LinearSystem(RATES + SLACKS)
    s = s.le({"r0": 1, "r1s": 1}, q["iuxz"], "eve-common")
    s = s.le({"r1": 1, "r1s": -1, "rds": 1, "rs": 1}, q["ivy_ux2"], "bob-cloud")
    s = s.le({"r1": 1, "rds": 1, "rs": 1}, q["iuvy_x2"], "bob-private")
    s = s.le({"r0": 1, "r1": 1, "rds": 1, "rs": 1}, q["iuvxy"], "bob-all")
    s = s.ge({"r1": 1, "r1s": -1, "rss": -1, "rds": 1}, q["ivz_ux2"], "eve-confusion")
    s = s.ge({"rd": 1, "rds": -1}, q["ix1z_uvx2"], "randomness")
    return s.nonnegative()


def membership(q: RateQuadruple | Sequence[float], sys: LinearSystem) -> bool:
    """Is the rate point in the region (for some nonnegative slacks, if any)?"""
    point = q.as_tuple() if isinstance(q, RateQuadruple) else tuple(q)
    if sys.variables[:4] != RATES or len(point) != 4:
        raise VariableMismatch(f"system over {sys.variables} is not a rate region")
    extra = sys.variables[4:]
    if not extra:
        return sys.contains(point)
    if any(v not in SLACKS for v in extra):
        raise VariableMismatch(f"unexpected variables {extra}")
    pt = [rationalize(x) if isinstance(x, float) else Fraction(x) for x in point]
    rows = []
    for r in sys.rows:
        fixed = sum((c * x for c, x in zip(r.coeffs[:4], pt)), Fraction(0))
        rows.append(Inequality(r.coeffs[4:], r.rhs - fixed, r.tag))
    return LinearSystem(extra, tuple(rows)).is_feasible()


def cardinality_caps(x1_size: int, x2_size: int) -> tuple[int, int]:
    """Auxiliary alphabet bounds (|U|, |V|) sufficient for the region."""
    a = x1_size * x2_size
    return a + 3, a * a + 4 * a + 3


def _design_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _sample_one(args):
    x1_size, x2_size, py, pz, seed, index, u_cap, v_cap = args
    rng = _design_rng(seed, index)
    u = int(rng.integers(1, u_cap + 1))
    v = int(rng.integers(1, v_cap + 1))
    design = random_design(rng, x1_size, x2_size, u, v)
    return design, info_vector(design, py, pz)


def sample_designs(
    x1_size: int,
    x2_size: int,
    py: Channel,
    pz: Channel,
    budget: int,
    seed: int,
    u_max: int | None = None,
    v_max: int | None = None,
    workers: int = 1,
) -> list[tuple[InputDesign, InfoVector]]:
    """Seeded random designs with auxiliary alphabets under the caps.

    Design ``i`` depends only on ``(seed, i)``, so the result is the same
    for any number of workers.  ``u_max``/``v_max`` can only lower the caps.
    """
    if budget < 1:
        raise BadBudget(f"budget must be >= 1, got {budget}")
    u_cap, v_cap = cardinality_caps(x1_size, x2_size)
    if u_max is not None:
        u_cap = max(1, min(u_cap, u_max))
    if v_max is not None:
        v_cap = max(1, min(v_cap, v_max))
    jobs = [(x1_size, x2_size, py, pz, seed, i, u_cap, v_cap) for i in range(budget)]
    return pmap(_sample_one, jobs, workers)


def _random_instance(args):
    seed, index, sizes, u_max, v_max = args
    rng = _design_rng(seed, index)
    x1, x2, y, z = sizes
    py = random_channel(rng, (x1, x2), y)
    if index % 2 == 0:
        # physically degraded eavesdropper: Z is a noisy copy of Y
        pz = Channel(py.table @ random_simplex(rng, (y, z)))
    else:
        pz = random_channel(rng, (x1, x2), z)
    u = int(rng.integers(1, u_max + 1))
    v = int(rng.integers(1, v_max + 1))
    design = random_design(rng, x1, x2, u, v)
    return info_vector(design, py, pz)


def random_info_vectors(
    count: int,
    seed: int,
    sizes: tuple[int, int, int, int] = (2, 2, 2, 2),
    u_max: int = 3,
    v_max: int = 4,
    workers: int = 1,
) -> list[InfoVector]:
    """Info vectors of random channel pairs and random designs.

    Even indices use an eavesdropper channel degraded from the legitimate
    one, so about half the instances have a nonempty secrecy region.
    """
    if count < 1:
        raise BadBudget(f"count must be >= 1, got {count}")
    jobs = [(seed, i, sizes, u_max, v_max) for i in range(count)]
    return pmap(_random_instance, jobs, workers)


# ---------------------------------------------------------------------------
# reporting helpers

# objective weights over (rd, r0, r1, rs); the small rd penalty picks the
# least-randomness point among maximizers
DIRECTIONS = {
    "max_rs": (Fraction(-1, 1000), 0, 0, 1),
    "max_r0": (Fraction(-1, 1000), 1, 0, 0),
    "max_r1": (Fraction(-1, 1000), 0, 1, 0),
    "max_sum": (Fraction(-1, 1000), 1, 1, 1),
    "min_rd": (-1, 0, 0, 0),
}


def extreme_points(sys: LinearSystem) -> dict[str, tuple[Fraction, ...] | None]:
    """LP maximizers of the reporting directions; ``None`` if the region is empty."""
    out = {}
    for name, w in DIRECTIONS.items():
        res = sys.maximize(w)
        out[name] = res.x if res.status == simplex.OPTIMAL else None
    return out


def hull_vertices(points: Sequence[Sequence]) -> list[int]:
    """Indices of points that are vertices of the convex hull of all points.

    Exact: a point is kept iff it is not a convex combination of the other
    distinct points.  Duplicates keep their first occurrence only.
    """
    pts = [tuple(Fraction(x) for x in p) for p in points]
    first = {}
    for i, p in enumerate(pts):
        first.setdefault(p, i)
    uniq = sorted(first.values())
    keep = []
    for i in uniq:
        others = [pts[k] for k in uniq if k != i]
        if not others:
            keep.append(i)
            continue
        dim = len(pts[i])
        A, b = [], []
        for d in range(dim):
            row = [p[d] for p in others]
            A.append(row)
            b.append(pts[i][d])
            A.append([-v for v in row])
            b.append(-pts[i][d])
        A.append([1] * len(others))
        b.append(1)
        A.append([-1] * len(others))
        b.append(-1)
        res = simplex.maximize([0] * len(others), A, b, [True] * len(others))
        if res.status == simplex.INFEASIBLE:
            keep.append(i)
    return keep

"""Per-instance verification that the slack-variable inner bound projects
onto the capacity region.

For one :class:`~cicc.region.InfoVector` the check

1. eliminates the slacks ``r1s, rds, rss`` (in that order) from
   :func:`~cicc.region.slack_system` and compares the projection with
   the closed-form seven-row system,
2. adds ``r0 <= I(U,X2;Y)`` and certifies that the joint ``r0 + rs`` row is
   the (1, 1) combination of that row and the secrecy row,
3. checks the augmented projection against :func:`~cicc.region.capacity_region`.

All comparisons are exact (mutual LP implication over rationals).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .polytope import (
    Inequality,
    LinearSystem,
    equivalent,
    fm_eliminate,
    is_redundant,
    prune,
)
from .region import (
    RATES,
    SLACKS,
    InfoVector,
    capacity_region,
    exact_constants,
    slack_system,
)

ELIMINATION_ORDER = SLACKS


def projected_system(iv: InfoVector) -> LinearSystem:
    """Closed form of the projection, one row per listed inequality."""
    q = exact_constants(iv)
    gap = q["ivy_ux2"] - q["ivz_ux2"]
    s = LinearSystem(RATES)
    s = s.le({"r0": 1}, q["iuxz"], "common-eve")
    s = s.le({"r0": 1, "rs": 1}, gap + q["iuxy"], "joint")
    s = s.le({"r1": 1, "rs": 1}, q["iuvy_x2"], "private")
    s = s.le({"r0": 1, "r1": 1, "rs": 1}, q["ivy_ux2"] + min(q["iuxy"], q["iuxz"]), "sum-rate")
    s = s.le({"rs": 1}, gap, "secrecy")
    s = s.ge({"rd": 1, "r1": 1}, q["ix1z_ux2"], "randomness-outer")
    s = s.ge({"rd": 1}, q["ix1z_uvx2"], "randomness")
    return s.nonnegative()


def added_row(sys: LinearSystem, iv: InfoVector) -> Inequality:
    return sys.row({"r0": 1}, exact_constants(iv)["iuxy"], "added")


def certificate(
    target: Inequality, first: Inequality, second: Inequality
) -> tuple[Fraction, Fraction] | None:
    """Nonnegative (a, b) with ``target == a*first + b*second`` exactly, if any.

    Solved on the first pair of columns where the two rows are linearly
    independent, then checked on every coefficient and the right-hand side.
    """
    n = len(target.coeffs)
    for i in range(n):
        for j in range(i + 1, n):
            det = first.coeffs[i] * second.coeffs[j] - first.coeffs[j] * second.coeffs[i]
            if det == 0:
                continue
            a = (target.coeffs[i] * second.coeffs[j] - target.coeffs[j] * second.coeffs[i]) / det
            b = (first.coeffs[i] * target.coeffs[j] - first.coeffs[j] * target.coeffs[i]) / det
            if a < 0 or b < 0:
                return None
            ok = all(
                a * f + b * s == t
                for f, s, t in zip(first.coeffs, second.coeffs, target.coeffs)
            ) and a * first.rhs + b * second.rhs == target.rhs
            return (a, b) if ok else None
    return None


@dataclass
class EliminationReport:
    projection_ok: bool = False
    certificate: tuple[Fraction, Fraction] | None = None
    redundant_ok: bool = False
    region_ok: bool = False
    nonempty: bool = False
    sizes: list[tuple[str, int, int]] = field(default_factory=list)
    eliminated: LinearSystem | None = None
    details: list[str] = field(default_factory=list)

    @property
    def certificate_ok(self) -> bool:
        return self.certificate == (1, 1) and self.redundant_ok

    @property
    def passed(self) -> bool:
        return self.projection_ok and self.certificate_ok and self.region_ok


def verify_elimination(iv: InfoVector) -> EliminationReport:
    rep = EliminationReport()
    sys = slack_system(iv)
    for var in ELIMINATION_ORDER:
        raw = fm_eliminate(sys, var)
        sys = prune(raw)
        rep.sizes.append((var, len(raw), len(sys)))
    rep.eliminated = sys

    closed = projected_system(iv)
    rep.projection_ok = equivalent(sys, closed)
    if not rep.projection_ok:
        rep.details.append("projection differs from the closed-form system")

    extra = added_row(closed, iv)
    by_tag = {r.tag: r for r in closed.rows}
    joint, secrecy = by_tag["joint"], by_tag["secrecy"]
    rep.certificate = certificate(joint, extra, secrecy)
    if rep.certificate != (1, 1):
        rep.details.append(f"joint-row certificate is {rep.certificate}, expected (1, 1)")
    rest = LinearSystem(RATES, tuple(r for r in closed.rows if r is not joint) + (extra,))
    rep.redundant_ok = is_redundant(rest, joint)
    if not rep.redundant_ok:
        rep.details.append("joint row not implied once r0 <= I(U,X2;Y) is added")

    augmented = sys.with_rows([added_row(sys, iv)])
    target = capacity_region(iv)
    rep.region_ok = equivalent(target, augmented)
    if not rep.region_ok:
        rep.details.append("augmented projection differs from the capacity region")
    rep.nonempty = target.is_feasible()
    return rep

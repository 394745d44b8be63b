"""Gallager-style exponent functions and the finite-length bounds built on them.

A :class:`PsiSpec` describes a two-stage channel: a prior over a
conditioning index ``w``, an inner channel ``w -> x`` and an outer channel
``(w, x) -> z``.  Its exponent is

    psi(theta) = log sum_w prior(w) sum_z
                 [sum_x inner(x|w) outer(z|w,x)^(1+theta)] * denom(z|w)^(-theta)

with ``denom(z|w) = sum_x inner(x|w) outer(z|w,x)``.  ``psi`` is convex,
vanishes at 0, and its slope there is I(X; Z | W).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, SupportViolation, ThetaOutOfRange, TooLarge
from .prob import (
    MAX_CELLS,
    Channel,
    Dist,
    InputDesign,
    Joint,
    cond_mutual_info,
    guard_cells,
    output_laws,
)

FD_STEP = 1e-4
THETA_GRID = 20
GOLDEN_ITERS = 80
UNIT_RATIO_TOL = 1e-12


@dataclass(frozen=True)
class PsiSpec:
    prior: Dist
    inner: Channel  # table [w, x]
    outer: Channel  # table [w, x, z]

    def __post_init__(self):
        nw = len(self.prior)
        if self.inner.in_sizes != (nw,):
            raise ShapeMismatch("inner channel must be indexed by the prior's alphabet")
        if self.outer.in_sizes != (nw, self.inner.out_size):
            raise ShapeMismatch("outer channel must be indexed by (w, x)")

    def joint(self) -> Joint:
        t = (
            self.prior.p[:, None, None]
            * self.inner.table[:, :, None]
            * self.outer.table
        )
        return Joint(("W", "X", "Z"), t)

    def mutual_information(self) -> float:
        """I(X; Z | W), the slope of psi at zero."""
        return cond_mutual_info(self.joint(), "X", "Z", "W")

    def power(self, n: int) -> PsiSpec:
        """The n-letter memoryless extension."""
        nw, nx = self.inner.table.shape
        nz = self.outer.out_size
        guard_cells((nw * nx * nz) ** n, "n-letter exponent spec")
        prior, inner, outer = self.prior.p, self.inner.table, self.outer.table
        for _ in range(n - 1):
            prior = np.multiply.outer(prior, self.prior.p).ravel()
            inner = np.einsum("ax,by->abxy", inner, self.inner.table)
            inner = inner.reshape(inner.shape[0] * inner.shape[1], -1)
            outer = np.einsum("axz,byu->abxyzu", outer, self.outer.table)
            a, b, x, y, z, u = outer.shape
            outer = outer.reshape(a * b, x * y, z * u)
        return PsiSpec(Dist(prior), Channel(inner), Channel(outer))


def outer_spec(design: InputDesign, pz: Channel) -> PsiSpec:
    """Spec whose slope is I(X1; Z | U, V, X2): prior P_{UVX2}, inner P_{X1|V}."""
    s = design.sizes
    nu, nv, nx2 = s["U"], s["V"], s["X2"]
    prior = design.joint_uvx2().ravel()  # w = (u, v, x2)
    inner = np.broadcast_to(
        design.p_x1_given_v.table[None, :, None, :], (nu, nv, nx2, s["X1"])
    ).reshape(nu * nv * nx2, -1)
    # outer[w, x1, z] = P(z | x1, x2)
    zx2 = np.moveaxis(pz.table, 1, 0)  # [x2, x1, z]
    outer = np.broadcast_to(
        zx2[None, None], (nu, nv, nx2, s["X1"], pz.out_size)
    ).reshape(nu * nv * nx2, s["X1"], pz.out_size)
    return PsiSpec(Dist(prior), Channel(inner), Channel(outer))


def inner_spec(design: InputDesign, pz: Channel) -> PsiSpec:
    """Spec whose slope is I(V; Z | U, X2): prior P_{UX2}, inner P_{V|UX2}."""
    s = design.sizes
    nu, nv, nx2 = s["U"], s["V"], s["X2"]
    pux2 = design.p_u_given_x2.table.T * design.p_x2.p[None, :]  # [u, x2]
    inner = design.p_v_given_ux2.table.reshape(nu * nx2, nv)
    zvx2 = output_laws(design, pz).given_vx2  # [v, x2, z]
    outer = np.broadcast_to(
        np.moveaxis(zvx2, 1, 0)[None], (nu, nx2, nv, pz.out_size)
    ).reshape(nu * nx2, nv, pz.out_size)
    return PsiSpec(Dist(pux2.ravel()), Channel(inner), Channel(outer))


def psi(theta: float, spec: PsiSpec) -> float:
    if not 0 <= theta <= 1:
        raise ThetaOutOfRange(f"theta must lie in (0, 1], got {theta}")
    if theta == 0:
        return 0.0
    inner = spec.inner.table[:, :, None]
    outer = spec.outer.table
    denom = np.sum(inner * outer, axis=1)  # [w, z]
    num = np.sum(inner * outer ** (1.0 + theta), axis=1)
    live = denom > 0
    if (num[~live] > 0).any():
        raise SupportViolation("positive numerator over a zero output probability")
    # the sum is 1 + sum inner*outer*((outer/denom)^theta - 1); computing the
    # excess directly keeps psi accurate when it is tiny
    mass = inner * outer
    pos = mass > 0
    ratio = np.zeros_like(mass)
    ratio[pos] = np.log(np.broadcast_to(outer, mass.shape)[pos]) - np.log(
        np.broadcast_to(denom[:, None, :], mass.shape)[pos]
    )
    excess = np.where(pos, mass * np.expm1(theta * ratio), 0.0).sum(axis=(1, 2))
    return math.log1p(float(spec.prior.p @ excess))


def psi_prime_at_zero(spec: PsiSpec, h: float = FD_STEP) -> tuple[float, float]:
    """One-sided second-order slope estimate at 0 and the matching I(X;Z|W)."""
    fd = (4.0 * psi(h, spec) - psi(2.0 * h, spec)) / (2.0 * h)
    return fd, spec.mutual_information()


def _check_theta(*thetas):
    for t in thetas:
        if not 0 < t <= 1:
            raise ThetaOutOfRange(f"theta must lie in (0, 1], got {t}")


def term(size: int, theta: float, spec: PsiSpec, n: int = 1) -> float:
    """One resolvability term ``exp(n psi(theta)) / (theta size^theta)``."""
    _check_theta(theta)
    return math.exp(n * psi(theta, spec) - theta * math.log(size)) / theta


def leakage_bound(
    nA: int,
    nJ: int,
    theta: float,
    theta2: float,
    design: InputDesign,
    pz: Channel,
    n: int = 1,
) -> float:
    """Expected-leakage bound for dummy-set size ``nA`` and sub-message size ``nJ``."""
    _check_theta(theta, theta2)
    if nA < 1 or nJ < 1:
        raise ShapeMismatch("set sizes must be positive")
    return term(nA, theta, outer_spec(design, pz), n) + term(
        nJ, theta2, inner_spec(design, pz), n
    )


def minimize_term(size: int, spec: PsiSpec, n: int = 1) -> tuple[float, float]:
    """(theta, value) minimizing :func:`term` over (0, 1].

    The log of the term is convex in theta, so a grid search followed by a
    golden-section refinement inside the best grid bracket finds the
    minimum.  Ties keep the earliest candidate, which makes the search
    deterministic.
    """
    log_size = math.log(size)

    def f(t):
        return n * psi(t, spec) - t * log_size - math.log(t)

    grid = [(k + 1) / THETA_GRID for k in range(THETA_GRID)]
    vals = [f(t) for t in grid]
    k = min(range(len(grid)), key=lambda i: vals[i])
    best_t, best_v = grid[k], vals[k]
    lo = grid[k - 1] if k > 0 else 1e-9
    hi = grid[k + 1] if k + 1 < len(grid) else 1.0
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(GOLDEN_ITERS):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    t = c if fc <= fd else d
    v = min(fc, fd)
    if v < best_v:
        best_t, best_v = t, v
    return best_t, math.exp(best_v)


def optimize_theta(
    nA: int, nJ: int, design: InputDesign, pz: Channel, n: int = 1
) -> tuple[float, float, float]:
    """(theta, theta2, bound) minimizing :func:`leakage_bound`.

    The bound is a sum of a theta-only and a theta2-only term, so the two
    are minimized separately.
    """
    t1, v1 = minimize_term(nA, outer_spec(design, pz), n)
    t2, v2 = minimize_term(nJ, inner_spec(design, pz), n)
    return t1, t2, v1 + v2


# ---------------------------------------------------------------------------
# error-probability bounds


def _sum_distribution(values: np.ndarray, probs: np.ndarray, n: int):
    """Law of the sum of n i.i.d. draws; equal float sums are merged."""
    keep = probs > 0
    base_v, base_p = values[keep], probs[keep]
    v, p = np.zeros(1), np.ones(1)
    for _ in range(n):
        v = (v[:, None] + base_v[None, :]).ravel()
        p = (p[:, None] * base_p[None, :]).ravel()
        if v.size > MAX_CELLS:
            raise TooLarge(f"sum distribution with {v.size} atoms")
        v, inv = np.unique(v, return_inverse=True)
        p = np.bincount(inv.ravel(), weights=p, minlength=v.size)
    return v, p


def _below(values, probs, n, alpha) -> float:
    v, p = _sum_distribution(values.ravel(), probs.ravel(), n)
    return float(p[v < alpha].sum())


def log_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``log(num/den)`` with 0/x = -inf and x/0 = +inf for x > 0.

    Ratios within ``UNIT_RATIO_TOL`` of 1 are set to exactly 0: laws that
    agree mathematically but were summed in a different order must still
    pass a threshold of 0.
    """
    num, den = np.broadcast_arrays(np.asarray(num, float), np.asarray(den, float))
    out = np.zeros(num.shape)
    pos = (num > 0) & (den > 0)
    out[pos] = np.log(num[pos]) - np.log(den[pos])
    out[np.abs(out) < UNIT_RATIO_TOL] = 0.0
    out[num <= 0] = -np.inf
    out[(num > 0) & (den <= 0)] = np.inf
    return out


def bob_ratio_tables(design: InputDesign, py: Channel):
    """Per-letter log ratios of the three receiver tests, indexed ``[u, v, x2, y]``.

    Returns ``(cell, llr1, llr2, llr3)`` where ``cell`` is P(u, v, x2, y).
    """
    ly = output_laws(design, py)
    puvx2 = design.joint_uvx2()
    num = np.broadcast_to(ly.given_vx2[None], (puvx2.shape[0], *ly.given_vx2.shape))
    llr1 = log_ratio(num, ly.given_ux2[:, None, :, :])
    llr2 = log_ratio(num, ly.given_x2[None, None, :, :])
    llr3 = log_ratio(num, ly.marginal[None, None, None, :])
    return puvx2[..., None] * num, llr1, llr2, llr3


def eve_ratio_table(design: InputDesign, pz: Channel):
    """Per-letter log ratio of the eavesdropper test, indexed ``[u, x2, z]``.

    Returns ``(cell, llr0)`` where ``cell`` is P(u, x2, z).
    """
    lz = output_laws(design, pz)
    pux2 = design.p_u_given_x2.table.T * design.p_x2.p[None, :]
    return pux2[..., None] * lz.given_ux2, log_ratio(lz.given_ux2, lz.marginal[None, None, :])


def complement_probabilities(
    design: InputDesign,
    py: Channel,
    pz: Channel,
    alphas: dict[str, float],
    n: int,
) -> dict[str, float]:
    """Exact P(T_k^c) under the n-letter i.i.d. law, for k = 0..3.

    ``alphas`` maps ``"alpha0".."alpha3"`` to thresholds on the n-letter
    log-likelihood ratio; a sequence is in T_k iff its summed ratio is at
    least ``alpha_k``.
    """
    design.check_channels(py, pz)
    cell_y, llr1, llr2, llr3 = bob_ratio_tables(design, py)
    cell_z, llr0 = eve_ratio_table(design, pz)
    return {
        "T0": _below(llr0, cell_z, n, alphas["alpha0"]),
        "T1": _below(llr1, cell_y, n, alphas["alpha1"]),
        "T2": _below(llr2, cell_y, n, alphas["alpha2"]),
        "T3": _below(llr3, cell_y, n, alphas["alpha3"]),
    }


def error_bounds(
    sizes: dict[str, int],
    alphas: dict[str, float],
    design: InputDesign,
    py: Channel,
    pz: Channel,
    n: int,
) -> tuple[float, float]:
    """Expected decoding-error bounds for Bob and Eve.

    ``sizes`` maps ``k, i, j, s, a`` to message-set sizes.
    """
    c = complement_probabilities(design, py, pz, alphas, n)
    K, I, J, S = sizes["k"], sizes["i"], sizes["j"], sizes["s"]
    bob = (
        c["T1"]
        + c["T2"]
        + c["T3"]
        + J * S * math.exp(-alphas["alpha1"])
        + I * J * S * math.exp(-alphas["alpha2"])
        + K * I * J * S * math.exp(-alphas["alpha3"])
    )
    eve = c["T0"] + K * I * math.exp(-alphas["alpha0"])
    return bob, eve

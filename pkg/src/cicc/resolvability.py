"""One-shot channel resolvability with a two-layer random map.

A seed ``(b1, b2)`` uniform on ``m1 x m2`` picks a cloud center ``v[b2]``
and then a satellite ``x[b2, b1]``; the channel output law under a uniform
seed should approximate the output law under the true input
distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .exponents import PsiSpec, minimize_term, term
from .parallel import pmap
from .prob import Channel, Dist, kl


@dataclass(frozen=True, eq=False)
class ResolvabilityCode:
    m1: int
    m2: int
    v: np.ndarray  # [m2]
    x: np.ndarray  # [m2, m1]
    seed: object = None

    def __post_init__(self):
        if self.v.shape != (self.m2,) or self.x.shape != (self.m2, self.m1):
            raise ShapeMismatch("map arrays do not match (m1, m2)")


def gen_map(pv: Dist, px_given_v: Channel, m1: int, m2: int, seed) -> ResolvabilityCode:
    if m1 < 1 or m2 < 1:
        raise ShapeMismatch("m1 and m2 must be positive")
    rng = np.random.default_rng(seed)
    v = rng.choice(len(pv), size=m2, p=pv.p)
    x = np.empty((m2, m1), dtype=int)
    for i in range(m2):
        row = px_given_v.table[v[i]]
        x[i] = rng.choice(row.size, size=m1, p=row)
    return ResolvabilityCode(m1, m2, v, x, seed)


def simulated_output(code: ResolvabilityCode, pz_given_x: Channel) -> Dist:
    if code.x.max() >= pz_given_x.in_sizes[0] or pz_given_x.input_arity != 1:
        raise ShapeMismatch("map symbols fall outside the channel input alphabet")
    rows = pz_given_x.table[code.x.ravel()]
    p = rows.mean(axis=0)
    return Dist(p / p.sum())


def target_output(px: Dist, pz_given_x: Channel) -> np.ndarray:
    return px.p @ pz_given_x.table


def divergence_to_target(code: ResolvabilityCode, pz_given_x: Channel, px: Dist) -> float:
    """D(simulated output || true output) in nats."""
    return kl(simulated_output(code, pz_given_x), target_output(px, pz_given_x))


def _specs(pv: Dist, px_given_v: Channel, pz_given_x: Channel) -> tuple[PsiSpec, PsiSpec]:
    nv = len(pv)
    outer = np.broadcast_to(pz_given_x.table[None], (nv, *pz_given_x.table.shape))
    satellite = PsiSpec(pv, px_given_v, Channel(outer))
    # second exponent: single conditioning point, the marginal input law
    px = pv.p @ px_given_v.table
    cloud = PsiSpec(
        Dist(np.ones(1)), Channel(px[None] / px.sum()), Channel(pz_given_x.table[None])
    )
    return satellite, cloud


def resolvability_bound(
    theta: float,
    theta2: float,
    m1: int,
    m2: int,
    pv: Dist,
    px_given_v: Channel,
    pz_given_x: Channel,
) -> float:
    """Expected-divergence bound ``term(m1, theta) + term(m2, theta2)``."""
    satellite, cloud = _specs(pv, px_given_v, pz_given_x)
    return term(m1, theta, satellite) + term(m2, theta2, cloud)


def optimized_bound(
    m1: int, m2: int, pv: Dist, px_given_v: Channel, pz_given_x: Channel
) -> tuple[float, float, float]:
    """(theta, theta2, bound) with each exponent chosen separately."""
    satellite, cloud = _specs(pv, px_given_v, pz_given_x)
    t1, v1 = minimize_term(m1, satellite)
    t2, v2 = minimize_term(m2, cloud)
    return t1, t2, v1 + v2


@dataclass
class ResolvabilityReport:
    m1: int
    m2: int
    divergences: list[float]
    mean: float
    stderr: float
    bound: float
    theta: float
    theta2: float

    @property
    def holds(self) -> bool:
        return self.mean <= self.bound + 3 * self.stderr


def _one(args):
    pv, px_given_v, pz_given_x, m1, m2, seed, t = args
    code = gen_map(pv, px_given_v, m1, m2, (seed, t))
    px = Dist(pv.p @ px_given_v.table)
    return divergence_to_target(code, pz_given_x, px)


def trials(
    pv: Dist,
    px_given_v: Channel,
    pz_given_x: Channel,
    m1: int,
    m2: int,
    maps: int,
    seed: int,
    workers: int = 1,
    theta: float | None = None,
    theta2: float | None = None,
) -> ResolvabilityReport:
    """Mean exact divergence over ``maps`` random maps, map ``t`` seeded by ``(seed, t)``."""
    if maps < 1:
        raise ShapeMismatch("need at least one map")
    args = [(pv, px_given_v, pz_given_x, m1, m2, seed, t) for t in range(maps)]
    divs = pmap(_one, args, workers)
    vals = np.array(divs)
    stderr = float(vals.std(ddof=1) / math.sqrt(maps)) if maps > 1 else 0.0
    if theta is None or theta2 is None:
        t1, t2, _ = optimized_bound(m1, m2, pv, px_given_v, pz_given_x)
        theta = t1 if theta is None else theta
        theta2 = t2 if theta2 is None else theta2
    bound = resolvability_bound(theta, theta2, m1, m2, pv, px_given_v, pz_given_x)
    return ResolvabilityReport(m1, m2, divs, float(vals.mean()), stderr, bound, theta, theta2)

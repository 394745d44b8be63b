"""Finite-blocklength simulation of the superposition wiretap code.

Codebooks are drawn hierarchically (x2, then u, then v, then x1).  Bob
decodes (k, i, j, s) by a unique-hit threshold test on (u, v, x2, y); Eve
decodes k alone by the indirect test on (u, x2, z).  Error probabilities
and the leakage I(S; Z^n) are computed exactly by enumerating every
output sequence, so the only randomness is over codebooks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyMessageSet, ShapeMismatch
from .exponents import (
    bob_ratio_tables,
    error_bounds,
    eve_ratio_table,
    leakage_bound,
    optimize_theta,
)
from .parallel import pmap
from .prob import Channel, InputDesign, guard_cells, kl
from .region import RateQuadruple, info_vector

SIZE_SLACK = 1e-9


@dataclass(frozen=True)
class CodeSizes:
    k: int
    i: int
    j: int
    s: int
    a: int

    def __post_init__(self):
        for name in ("k", "i", "j", "s", "a"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise EmptyMessageSet(f"message set {name} has size {v}")

    def as_dict(self) -> dict[str, int]:
        return {"k": self.k, "i": self.i, "j": self.j, "s": self.s, "a": self.a}

    @property
    def codewords(self) -> int:
        return self.k * self.i * self.j * self.s * self.a


@dataclass(frozen=True)
class Thresholds:
    alpha0: float
    alpha1: float
    alpha2: float
    alpha3: float

    def as_dict(self) -> dict[str, float]:
        return {
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "alpha3": self.alpha3,
        }


@dataclass(frozen=True, eq=False)
class Codebook:
    """Random superposition codebook; every array ends with the time axis.

    Shapes: ``x2 [k, n]``, ``u [k, i, n]``, ``v [k, i, j, s, n]``,
    ``x1 [k, i, j, s, a, n]``.
    """

    n: int
    sizes: CodeSizes
    x2: np.ndarray
    u: np.ndarray
    v: np.ndarray
    x1: np.ndarray
    design: InputDesign
    seed: object = None


def _draw(rng: np.random.Generator, rows: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw of one symbol per row of ``rows`` (last axis)."""
    cdf = np.cumsum(rows, axis=-1)
    r = rng.random(rows.shape[:-1])
    idx = (cdf < r[..., None]).sum(axis=-1)
    return np.minimum(idx, rows.shape[-1] - 1)


def gen_codebook(design: InputDesign, sizes: CodeSizes, n: int, seed) -> Codebook:
    """Draw a codebook from ``np.random.default_rng(seed)``.

    ``seed`` may be an int or a sequence of ints.
    """
    if n < 1:
        raise ShapeMismatch("blocklength must be at least 1")
    guard_cells(sizes.codewords * n, "codebook")
    rng = np.random.default_rng(seed)
    K, I, J, S, A = sizes.k, sizes.i, sizes.j, sizes.s, sizes.a
    x2 = _draw(rng, np.broadcast_to(design.p_x2.p, (K, n, len(design.p_x2))))
    pu = design.p_u_given_x2.table[x2]  # [k, n, u]
    u = _draw(rng, np.broadcast_to(pu[:, None], (K, I, n, pu.shape[-1])))
    pv = design.p_v_given_ux2.table[u, x2[:, None, :]]  # [k, i, n, v]
    v = _draw(rng, np.broadcast_to(pv[:, :, None, None], (K, I, J, S, n, pv.shape[-1])))
    px1 = design.p_x1_given_v.table[v]  # [k, i, j, s, n, x1]
    x1 = _draw(rng, np.broadcast_to(px1[:, :, :, :, None], (K, I, J, S, A, n, px1.shape[-1])))
    return Codebook(n, sizes, x2, u, v, x1, design, seed)


# ---------------------------------------------------------------------------
# threshold tests


def sum_log_ratios(letters: np.ndarray, axis: int = -1) -> np.ndarray:
    """Sum per-letter log ratios; any -inf wins, then any +inf."""
    letters = np.asarray(letters, float)
    neg = np.isneginf(letters).any(axis=axis)
    pos = np.isposinf(letters).any(axis=axis)
    total = np.where(np.isfinite(letters), letters, 0.0).sum(axis=axis)
    return np.where(neg, -np.inf, np.where(pos, np.inf, total))


def t_membership(
    seqs: Sequence[Sequence[int]],
    design: InputDesign,
    py: Channel,
    pz: Channel,
    th: Thresholds,
    which: str,
) -> bool:
    """Whether a tuple of n-sequences lies in the threshold set ``which``.

    ``seqs`` is ``(u, x2, z)`` for ``T0`` and ``(u, v, x2, y)`` for
    ``T1``, ``T2`` and ``T3``.
    """
    seqs = [np.asarray(s, dtype=int) for s in seqs]
    if len({s.shape for s in seqs}) != 1 or seqs[0].ndim != 1:
        raise ShapeMismatch("sequences must share a common length")
    if which == "T0":
        if len(seqs) != 3:
            raise ShapeMismatch("T0 takes (u, x2, z)")
        table, alpha = eve_ratio_table(design, pz)[1], th.alpha0
    elif which in ("T1", "T2", "T3"):
        if len(seqs) != 4:
            raise ShapeMismatch(f"{which} takes (u, v, x2, y)")
        m = int(which[1])
        table, alpha = bob_ratio_tables(design, py)[m], th.as_dict()[f"alpha{m}"]
    else:
        raise ValueError(f"unknown threshold set {which!r}")
    return bool(sum_log_ratios(table[tuple(seqs)]) >= alpha)


def _scores(table: np.ndarray, index: tuple, out_size: int, n: int) -> np.ndarray:
    """n-letter log ratio of each codeword tuple against every output sequence.

    ``index`` holds integer arrays ``[..., n]`` selecting the conditioning
    symbols of ``table``; the result has shape ``(..., out_size**n)`` with
    output sequences in lexicographic order.
    """
    letters = table[index]  # [..., n, out]
    lead = letters.shape[:-2]
    grid = np.zeros(lead + (out_size,) * n)
    neg = np.zeros(grid.shape, bool)
    pos = np.zeros(grid.shape, bool)
    for t in range(n):
        shape = lead + tuple(out_size if q == t else 1 for q in range(n))
        col = letters[..., t, :].reshape(shape)
        neg |= np.isneginf(col)
        pos |= np.isposinf(col)
        grid = grid + np.where(np.isfinite(col), col, 0.0)
    out = np.where(neg, -np.inf, np.where(pos, np.inf, grid))
    return out.reshape(lead + (out_size**n,))


def _output_probs(ch: Channel, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """P(o^n | x1^n, x2^n) for every output sequence, lexicographic order."""
    n = x1.shape[-1]
    rows = ch.table[x1, x2]  # [..., n, out]
    lead = rows.shape[:-2]
    p = np.ones(lead + (1,))
    for t in range(n):
        p = (p[..., :, None] * rows[..., t, None, :]).reshape(lead + (-1,))
    return p


class Receivers:
    """Decoding tables for one (design, py, pz, thresholds) setting."""

    def __init__(self, design: InputDesign, py: Channel, pz: Channel, th: Thresholds):
        design.check_channels(py, pz)
        self.design, self.py, self.pz, self.th = design, py, pz, th
        _, *self.bob_tables = bob_ratio_tables(design, py)
        self.eve_table = eve_ratio_table(design, pz)[1]

    def bob_hits(self, cb: Codebook) -> np.ndarray:
        """Boolean ``[k, i, j, s, y^n]``: quadruple inside T1 ∩ T2 ∩ T3."""
        K, I, J, S = cb.v.shape[:4]
        shape = (K, I, J, S, cb.n)
        u = np.broadcast_to(cb.u[:, :, None, None, :], shape)
        x2 = np.broadcast_to(cb.x2[:, None, None, None, :], shape)
        hit = None
        alphas = (self.th.alpha1, self.th.alpha2, self.th.alpha3)
        for table, alpha in zip(self.bob_tables, alphas):
            sc = _scores(table, (u, cb.v, x2), self.py.out_size, cb.n) >= alpha
            hit = sc if hit is None else hit & sc
        return hit

    def eve_hits(self, cb: Codebook) -> np.ndarray:
        """Boolean ``[k, z^n]``: some i puts (u_ki, x2_k, z) inside T0."""
        x2 = np.broadcast_to(cb.x2[:, None, :], cb.u.shape)
        sc = _scores(self.eve_table, (cb.u, x2), self.pz.out_size, cb.n)
        return (sc >= self.th.alpha0).any(axis=1)

    @staticmethod
    def _guard(cb: Codebook, out_size: int) -> None:
        guard_cells(cb.sizes.codewords * out_size**cb.n, "output enumeration")

    def bob_decode_all(self, cb: Codebook) -> np.ndarray:
        """Flat decoded quadruple index per output sequence, -1 on failure."""
        self._guard(cb, self.py.out_size)
        hit = self.bob_hits(cb)
        flat = hit.reshape(-1, hit.shape[-1])
        unique = flat.sum(axis=0) == 1
        return np.where(unique, flat.argmax(axis=0), -1)

    def eve_decode_all(self, cb: Codebook) -> np.ndarray:
        self._guard(cb, self.pz.out_size)
        hit = self.eve_hits(cb)
        unique = hit.sum(axis=0) == 1
        return np.where(unique, hit.argmax(axis=0), -1)


def _seq_index(seq, out_size: int) -> int:
    idx = 0
    for s in seq:
        idx = idx * out_size + int(s)
    return idx


def bob_decode(y_seq, cb: Codebook, th: Thresholds, py: Channel, pz: Channel | None = None):
    """(k, i, j, s) for the unique quadruple in T1 ∩ T2 ∩ T3, else None."""
    y_seq = np.asarray(y_seq, dtype=int)
    if y_seq.shape != (cb.n,):
        raise ShapeMismatch(f"received sequence must have length {cb.n}")
    rx = Receivers(cb.design, py, pz if pz is not None else py, th)
    hit = rx.bob_hits(cb)[..., _seq_index(y_seq, py.out_size)]
    found = np.argwhere(hit)
    if len(found) != 1:
        return None
    return tuple(int(q) for q in found[0])


def eve_decode(z_seq, cb: Codebook, th: Thresholds, pz: Channel, py: Channel | None = None):
    """k when exactly one common message has a T0 hit, else None."""
    z_seq = np.asarray(z_seq, dtype=int)
    if z_seq.shape != (cb.n,):
        raise ShapeMismatch(f"received sequence must have length {cb.n}")
    rx = Receivers(cb.design, py if py is not None else pz, pz, th)
    hit = rx.eve_hits(cb)[:, _seq_index(z_seq, pz.out_size)]
    found = np.flatnonzero(hit)
    return int(found[0]) if len(found) == 1 else None


def leakage(cb: Codebook, pz: Channel) -> float:
    """I(S; Z^n) in nats with (k, l, a) uniform and independent of S."""
    K, I, J, S, A = cb.x1.shape[:5]
    x2 = np.broadcast_to(cb.x2[:, None, None, None, None, :], cb.x1.shape)
    pzx = _output_probs(pz, cb.x1, x2)  # [k, i, j, s, a, z^n]
    per_s = np.moveaxis(pzx, 3, 0).reshape(S, -1, pzx.shape[-1]).mean(axis=1)
    if (per_s == per_s[0]).all():
        return 0.0
    pz_bar = per_s.mean(axis=0)
    return float(np.mean([kl(row, pz_bar) for row in per_s]))


def exact_metrics(
    cb: Codebook, py: Channel, pz: Channel, th: Thresholds, rx: Receivers | None = None
) -> dict[str, float]:
    """Exact perr_bob, perr_eve and leakage of one codebook."""
    rx = rx or Receivers(cb.design, py, pz, th)
    K, I, J, S, A = cb.x1.shape[:5]
    x2 = np.broadcast_to(cb.x2[:, None, None, None, None, :], cb.x1.shape)

    bob = rx.bob_decode_all(cb)
    pyx = _output_probs(py, cb.x1, x2).reshape(K * I * J * S, A, -1)
    sent = np.arange(K * I * J * S)[:, None, None]
    ok_bob = (pyx * (bob[None, None, :] == sent)).sum()

    eve = rx.eve_decode_all(cb)
    pzx = _output_probs(pz, cb.x1, x2).reshape(K, I * J * S * A, -1)
    ok_eve = (pzx * (eve[None, None, :] == np.arange(K)[:, None, None])).sum()

    total = K * I * J * S * A
    return {
        "perr_bob": float(min(1.0, max(0.0, 1.0 - ok_bob / total))),
        "perr_eve": float(min(1.0, max(0.0, 1.0 - ok_eve / total))),
        "leakage": leakage(cb, pz),
    }


# ---------------------------------------------------------------------------
# experiments


METRICS = ("perr_bob", "perr_eve", "leakage")


def sizes_from_rates(rates: RateQuadruple, r1_split: float, delta: float, n: int) -> CodeSizes:
    """Message-set sizes ``floor(exp(n * exponent))``.

    A relative slack of ``SIZE_SLACK`` absorbs rounding, so a rate of
    exactly log 2 gives size 2 at n = 1.
    """
    exps = {
        "k": rates.r0 - delta,
        "i": r1_split - delta,
        "j": rates.r1 - r1_split + 2 * delta,
        "s": rates.rs - 4 * delta,
        "a": rates.rd + 2 * delta,
    }
    out = {}
    for name, e in exps.items():
        size = math.floor(math.exp(n * e) * (1 + SIZE_SLACK))
        if size < 1:
            raise EmptyMessageSet(
                f"message set {name} is empty: floor(exp({n} * {e:.6g})) = 0"
            )
        out[name] = size
    return CodeSizes(**out)


def default_r1_split(rates: RateQuadruple, iv) -> float:
    """Part of the private rate decoded by the eavesdropper along with k."""
    return max(0.0, min(rates.r1 - iv.ivz_ux2, iv.iuxz - rates.r0))


def default_thresholds(iv, delta: float, n: int) -> Thresholds:
    return Thresholds(
        n * (iv.iuxz - delta),
        n * (iv.ivy_ux2 - delta),
        n * (iv.iuvy_x2 - delta),
        n * (iv.iuvxy - delta),
    )


@dataclass
class ExperimentReport:
    sizes: CodeSizes
    thresholds: Thresholds
    n: int
    trials: list[dict[str, float]]
    mean: dict[str, float]
    stderr: dict[str, float]
    bound: dict[str, float]
    theta: float
    theta2: float
    notes: list[str] = field(default_factory=list)

    def holds(self, k: float = 3.0) -> dict[str, bool]:
        """Sample mean within ``k`` standard errors of each bound."""
        return {
            m: self.mean[m] <= self.bound[m] + k * self.stderr[m] for m in METRICS
        }


def _trial(args):
    design, py, pz, sizes, th, n, seed, t = args
    cb = gen_codebook(design, sizes, n, (seed, t))
    return exact_metrics(cb, py, pz, th)


def run_trials(
    design: InputDesign,
    py: Channel,
    pz: Channel,
    sizes: CodeSizes,
    th: Thresholds,
    n: int,
    codebooks: int,
    seed: int,
    workers: int = 1,
    theta: float | None = None,
    theta2: float | None = None,
) -> ExperimentReport:
    """Average exact metrics over independent codebooks and attach the bounds.

    Codebook ``t`` is drawn from ``default_rng((seed, t))`` and results are
    reduced in trial order, so the report does not depend on ``workers``.
    Without explicit exponents the leakage bound is optimized over both.
    """
    if codebooks < 1:
        raise ShapeMismatch("need at least one codebook")
    design.check_channels(py, pz)
    guard_cells(sizes.codewords * max(py.out_size, pz.out_size) ** n, "output enumeration")
    args = [(design, py, pz, sizes, th, n, seed, t) for t in range(codebooks)]
    trials = pmap(_trial, args, workers)
    mean, stderr = {}, {}
    for m in METRICS:
        vals = np.array([r[m] for r in trials])
        mean[m] = float(vals.mean())
        stderr[m] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    bob, eve = error_bounds(sizes.as_dict(), th.as_dict(), design, py, pz, n)
    if theta is None or theta2 is None:
        t1, t2, leak = optimize_theta(sizes.a, sizes.j, design, pz, n)
        theta = t1 if theta is None else theta
        theta2 = t2 if theta2 is None else theta2
    leak = leakage_bound(sizes.a, sizes.j, theta, theta2, design, pz, n)
    return ExperimentReport(
        sizes, th, n, trials, mean, stderr,
        {"perr_bob": bob, "perr_eve": eve, "leakage": leak}, theta, theta2,
    )


def experiment(
    design: InputDesign,
    py: Channel,
    pz: Channel,
    rates: RateQuadruple,
    delta: float,
    n: int,
    codebooks: int,
    seed: int,
    r1_split: float | None = None,
    workers: int = 1,
    theta: float | None = None,
    theta2: float | None = None,
) -> ExperimentReport:
    """Size the code from a rate quadruple and run :func:`run_trials`."""
    iv = info_vector(design, py, pz)
    split = default_r1_split(rates, iv) if r1_split is None else r1_split
    sizes = sizes_from_rates(rates, split, delta, n)
    th = default_thresholds(iv, delta, n)
    rep = run_trials(design, py, pz, sizes, th, n, codebooks, seed, workers, theta, theta2)
    rep.notes.append(f"r1_split={split!r}")
    return rep

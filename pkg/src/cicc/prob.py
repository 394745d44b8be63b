"""Finite-alphabet probability primitives.

Distributions, channels, dense joints over named coordinates, and the
information measures used everywhere else.  All logarithms are natural,
so every information quantity is in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AbsoluteContinuityViolated,
    AllZero,
    NegativeWeight,
    OverlappingSets,
    ShapeMismatch,
    TooLarge,
    UnknownCoordinate,
)

NORM_TOL = 1e-12
IDENTITY_TOL = 1e-10
MAX_CELLS = 10**8

AXES = ("U", "V", "X1", "X2", "Y", "Z")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def guard_cells(count: int, what: str = "table") -> None:
    if count > MAX_CELLS:
        raise TooLarge(f"{what} would need {count} cells (limit {MAX_CELLS})")


@dataclass(frozen=True, eq=False)
class Dist:
    """Probability vector over ``range(len(p))``."""

    p: np.ndarray

    def __post_init__(self):
        p = _frozen(self.p)
        if p.ndim != 1 or p.size == 0:
            raise ShapeMismatch("a Dist needs a non-empty 1-D weight vector")
        if (p < 0).any():
            raise NegativeWeight("negative probability")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ShapeMismatch(f"weights sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "p", p)

    def __len__(self):
        return self.p.size

    def __getitem__(self, x):
        return self.p[x]

    def entropy(self) -> float:
        return _entropy(self.p)


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional distribution table.

    ``table`` has shape ``(*in_sizes, out_size)``; the last axis is the
    output and every row along it sums to one.
    """

    table: np.ndarray

    def __post_init__(self):
        t = _frozen(self.table)
        if t.ndim < 2:
            raise ShapeMismatch("a Channel table needs at least one input axis")
        if (t < 0).any():
            raise NegativeWeight("negative transition probability")
        sums = t.sum(axis=-1)
        bad = np.abs(sums - 1.0) > NORM_TOL
        if bad.any():
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ShapeMismatch(f"row {idx} sums to {sums[idx]!r}, not 1")
        object.__setattr__(self, "table", t)

    @property
    def in_sizes(self) -> tuple[int, ...]:
        return self.table.shape[:-1]

    @property
    def out_size(self) -> int:
        return self.table.shape[-1]

    @property
    def input_arity(self) -> int:
        return self.table.ndim - 1

    def row(self, *inputs) -> Dist:
        return Dist(self.table[tuple(inputs)])


def make_dist(weights: Sequence[float]) -> Dist:
    """Normalize nonnegative weights into a :class:`Dist`."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ShapeMismatch("weights must be a non-empty sequence")
    if (w < 0).any():
        raise NegativeWeight(f"negative weight in {w.tolist()}")
    total = w.sum()
    if total <= 0:
        raise AllZero("all weights are zero")
    return Dist(w / total)


def make_channel(table) -> Channel:
    """Normalize each row of a nonnegative table into a :class:`Channel`."""
    t = np.asarray(table, dtype=float)
    if (t < 0).any():
        raise NegativeWeight("negative entry in channel table")
    sums = t.sum(axis=-1, keepdims=True)
    if (sums <= 0).any():
        raise AllZero("channel row with all-zero weights")
    return Channel(t / sums)


def kl(p: Dist | np.ndarray, q: Dist | np.ndarray) -> float:
    """Divergence D(p||q) in nats, with 0 ln(0/q) = 0."""
    p = p.p if isinstance(p, Dist) else np.asarray(p, dtype=float)
    q = q.p if isinstance(q, Dist) else np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ShapeMismatch(f"alphabets differ: {p.shape} vs {q.shape}")
    support = p > 0
    if (q[support] <= 0).any():
        raise AbsoluteContinuityViolated("p puts mass where q has none")
    ps, qs = p[support], q[support]
    return float(np.sum(ps * np.log(ps / qs)))


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


@dataclass(frozen=True)
class InputDesign:
    """Factorized input law enforcing (U,X2) - V - X1.

    Table layouts: ``p_u_given_x2[x2, u]``, ``p_v_given_ux2[u, x2, v]``,
    ``p_x1_given_v[v, x1]``.
    """

    p_x2: Dist
    p_u_given_x2: Channel
    p_v_given_ux2: Channel
    p_x1_given_v: Channel

    def __post_init__(self):
        nx2 = len(self.p_x2)
        if self.p_u_given_x2.in_sizes != (nx2,):
            raise ShapeMismatch("P_{U|X2} must be indexed by X2")
        nu = self.p_u_given_x2.out_size
        if self.p_v_given_ux2.in_sizes != (nu, nx2):
            raise ShapeMismatch("P_{V|U,X2} must be indexed by (U, X2)")
        nv = self.p_v_given_ux2.out_size
        if self.p_x1_given_v.in_sizes != (nv,):
            raise ShapeMismatch("P_{X1|V} must be indexed by V")

    @property
    def sizes(self) -> dict[str, int]:
        return {
            "U": self.p_u_given_x2.out_size,
            "V": self.p_v_given_ux2.out_size,
            "X1": self.p_x1_given_v.out_size,
            "X2": len(self.p_x2),
        }

    def check_channels(self, py: Channel, pz: Channel) -> None:
        want = (self.sizes["X1"], self.sizes["X2"])
        for name, ch in (("Y", py), ("Z", pz)):
            if ch.in_sizes != want:
                raise ShapeMismatch(
                    f"P_{{{name}|X1,X2}} has inputs {ch.in_sizes}, expected {want}"
                )

    def joint_uvx2(self) -> np.ndarray:
        """P(u, v, x2) as an array indexed ``[u, v, x2]``."""
        pux2 = self.p_u_given_x2.table.T * self.p_x2.p[None, :]
        return pux2[:, None, :] * np.moveaxis(self.p_v_given_ux2.table, 2, 1)


@dataclass(frozen=True, eq=False)
class Joint:
    """Dense joint distribution over named coordinates."""

    axes: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        t = _frozen(self.table)
        axes = tuple(self.axes)
        if t.ndim != len(axes):
            raise ShapeMismatch(f"{len(axes)} axes for a {t.ndim}-D table")
        if len(set(axes)) != len(axes):
            raise ShapeMismatch(f"duplicate axis names in {axes}")
        if (t < 0).any():
            raise NegativeWeight("negative joint probability")
        if abs(t.sum() - 1.0) > NORM_TOL:
            raise ShapeMismatch(f"joint sums to {t.sum()!r}, not 1")
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "axes", axes)

    def size(self, axis: str) -> int:
        return self.table.shape[self._index(axis)]

    def _index(self, axis: str) -> int:
        try:
            return self.axes.index(axis)
        except ValueError:
            raise UnknownCoordinate(f"{axis!r} not in {self.axes}") from None

    def marginal(self, keep: Sequence[str]) -> np.ndarray:
        """Marginal table with axes in the order given by ``keep``."""
        keep = list(keep)
        idx = [self._index(a) for a in keep]
        drop = tuple(i for i in range(len(self.axes)) if i not in idx)
        m = self.table.sum(axis=drop) if drop else self.table
        remaining = [i for i in range(len(self.axes)) if i in idx]
        return np.transpose(m, [remaining.index(i) for i in idx])

    def entropy(self, axes: Sequence[str] | None = None) -> float:
        if axes is None:
            return _entropy(self.table.ravel())
        return _entropy(self.marginal(axes).ravel())


def build_joint(design: InputDesign, py: Channel, pz: Channel) -> Joint:
    """Joint law of (U, V, X1, X2, Y, Z) induced by a design and two channels."""
    design.check_channels(py, pz)
    s = design.sizes
    guard_cells(
        s["U"] * s["V"] * s["X1"] * s["X2"] * py.out_size * pz.out_size, "joint"
    )
    # indices: a=u, b=x2, c=v, d=x1
    table = np.einsum(
        "b,ba,abc,cd,dby,dbz->acdbyz",
        design.p_x2.p,
        design.p_u_given_x2.table,
        design.p_v_given_ux2.table,
        design.p_x1_given_v.table,
        py.table,
        pz.table,
    )
    return Joint(AXES, table)


def _as_names(x) -> tuple[str, ...]:
    if isinstance(x, str):
        return (x,)
    return tuple(x)


def cond_mutual_info(j: Joint, a, b, c=()) -> float:
    """I(A; B | C) in nats for disjoint coordinate sets of ``j``.

    Empty ``a`` or ``b`` gives zero; empty ``c`` gives the plain mutual
    information.
    """
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    for name in a + b + c:
        j._index(name)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c) or (
        len(set(a)) != len(a) or len(set(b)) != len(b) or len(set(c)) != len(c)
    ):
        raise OverlappingSets(f"coordinate sets overlap: {a}, {b}, {c}")
    if not a or not b:
        return 0.0
    m = j.marginal(a + b + c)
    na = math.prod(m.shape[: len(a)])
    nb = math.prod(m.shape[len(a) : len(a) + len(b)])
    pabc = m.reshape(na, nb, -1)
    pac = pabc.sum(axis=1, keepdims=True)
    pbc = pabc.sum(axis=0, keepdims=True)
    pc = pabc.sum(axis=(0, 1), keepdims=True)
    num = pabc * pc
    den = pac * pbc
    mask = pabc > 0
    return float(np.sum(pabc[mask] * np.log(num[mask] / den[mask])))


def seq_axis(name: str, t: int) -> str:
    """Axis name of letter ``t`` (1-based) of a sequence coordinate."""
    return f"{name}_{t}"


def product_extension(j: Joint, n: int) -> Joint:
    """i.i.d. n-fold product; axis ``A`` of copy ``t`` becomes ``A_t``."""
    if n < 1:
        raise ShapeMismatch("n must be a positive integer")
    guard_cells(j.table.size**n, "product joint")
    table = j.table
    for _ in range(n - 1):
        table = np.multiply.outer(table, j.table)
    axes = tuple(seq_axis(a, t) for t in range(1, n + 1) for a in j.axes)
    return Joint(axes, table)


def csiszar_sum_check(
    j: Joint, y_axes: Sequence[str], z_axes: Sequence[str], cond=()
) -> tuple[float, float]:
    """Both sides of the Csiszar sum identity.

    ``lhs = sum_t I(Z_{t+1}^n; Y_t | Y^{t-1}, cond)`` and
    ``rhs = sum_t I(Y^{t-1}; Z_t | Z_{t+1}^n, cond)``, where ``y_axes`` and
    ``z_axes`` list the letters of Y^n and Z^n in time order.
    """
    y_axes, z_axes, cond = list(y_axes), list(z_axes), _as_names(cond)
    n = len(y_axes)
    if len(z_axes) != n:
        raise ShapeMismatch("Y and Z sequences must have the same length")
    if n > 4 or any(j.size(a) > 3 for a in y_axes + z_axes):
        raise TooLarge("identity check is limited to n <= 4 and alphabets <= 3")
    lhs = rhs = 0.0
    for t in range(n):
        past_y, future_z = y_axes[:t], z_axes[t + 1 :]
        lhs += cond_mutual_info(j, future_z, [y_axes[t]], past_y + list(cond))
        rhs += cond_mutual_info(j, past_y, [z_axes[t]], future_z + list(cond))
    return lhs, rhs


@dataclass(frozen=True, eq=False)
class OutputLaws:
    """Output law of one channel under a design, at every conditioning level.

    ``given_vx2[v, x2, o]`` equals P(o | u, v, x2) for every u;
    ``given_ux2[u, x2, o]``, ``given_x2[x2, o]`` and ``marginal[o]`` follow.
    """

    given_vx2: np.ndarray
    given_ux2: np.ndarray
    given_x2: np.ndarray
    marginal: np.ndarray


def output_laws(design: InputDesign, ch: Channel) -> OutputLaws:
    vx2 = np.einsum("vd,dbo->vbo", design.p_x1_given_v.table, ch.table)
    ux2 = np.einsum("abv,vbo->abo", design.p_v_given_ux2.table, vx2)
    x2 = np.einsum("ba,abo->bo", design.p_u_given_x2.table, ux2)
    marg = design.p_x2.p @ x2
    return OutputLaws(vx2, ux2, x2, marg)


# ---------------------------------------------------------------------------
# random construction helpers (symmetric Dirichlet(1) via normalized Exp(1))


def random_simplex(rng: np.random.Generator, shape) -> np.ndarray:
    """Rows drawn uniformly from the simplex along the last axis."""
    e = rng.exponential(1.0, size=shape)
    return e / e.sum(axis=-1, keepdims=True)


def random_channel(rng: np.random.Generator, in_sizes, out_size: int) -> Channel:
    return Channel(random_simplex(rng, (*in_sizes, out_size)))


def random_design(
    rng: np.random.Generator, x1_size: int, x2_size: int, u_size: int, v_size: int
) -> InputDesign:
    return InputDesign(
        Dist(random_simplex(rng, (x2_size,))),
        Channel(random_simplex(rng, (x2_size, u_size))),
        Channel(random_simplex(rng, (u_size, x2_size, v_size))),
        Channel(random_simplex(rng, (v_size, x1_size))),
    )


def random_joint(rng: np.random.Generator, axes: Sequence[str], sizes) -> Joint:
    t = rng.exponential(1.0, size=tuple(sizes))
    return Joint(tuple(axes), t / t.sum())

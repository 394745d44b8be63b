"""Plain-text problem files.

Example::

    # two binary inputs, binary outputs
    sizes x1=2 x2=2 y=2 z=2
    Y:
    0.9 0.1      # (x1, x2) = (0, 0)
    0.8 0.2      # (0, 1)
    0.1 0.9      # (1, 0)
    0.2 0.8      # (1, 1)
    Z:
    ...
    design u=2 v=2     # optional explicit input design
    PX2:
    0.5 0.5
    PU|X2:             # one row per x2
    PV|UX2:            # one row per (u, x2), lexicographic
    PX1|V:             # one row per v
    rates rd=0.1 r0=0.2 r1=0.1 rs=0.05
    delta 0.01
    n 2
    seed 7

Channel rows are listed in lexicographic order of their inputs.  A row
whose sum is off by more than ``ROW_TOL`` is rejected; smaller residue
from decimal rounding is divided out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError, StochasticityError
from .prob import Channel, Dist, InputDesign
from .region import RateQuadruple

ROW_TOL = 1e-9

_TABLES = {
    "Y": ("x1", "x2"),
    "Z": ("x1", "x2"),
    "PX2": (),
    "PU|X2": ("x2",),
    "PV|UX2": ("u", "x2"),
    "PX1|V": ("v",),
}
_OUT = {"Y": "y", "Z": "z", "PX2": "x2", "PU|X2": "u", "PV|UX2": "v", "PX1|V": "x1"}


@dataclass
class ProblemSpec:
    sizes: dict[str, int]
    py: Channel
    pz: Channel
    design: InputDesign | None = None
    rates: RateQuadruple | None = None
    delta: float | None = None
    n: int | None = None
    seed: int | None = None


def _strip(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def _keyvals(words, lineno, line, allowed):
    out = {}
    for w in words:
        col = line.index(w) + 1
        if "=" not in w:
            raise ParseError(f"expected key=value, got {w!r}", lineno, col)
        k, v = w.split("=", 1)
        if k not in allowed:
            raise ParseError(f"unknown key {k!r}", lineno, col)
        out[k] = (v, col)
    return out


def _number(text, lineno, col, kind=float):
    try:
        x = kind(text)
    except ValueError:
        raise ParseError(f"not a number: {text!r}", lineno, col) from None
    if kind is float and not math.isfinite(x):
        raise ParseError(f"not a finite number: {text!r}", lineno, col)
    return x


def parse_text(text: str, source: str = "<spec>") -> ProblemSpec:
    sizes: dict[str, int] = {}
    rows: dict[str, list[tuple[int, list[float]]]] = {}
    extras: dict[str, object] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line.strip():
            continue
        words = line.split()
        head = words[0]
        if head.endswith(":") and head[:-1] in _TABLES:
            if len(words) > 1:
                raise ParseError("table header must be alone on its line", lineno, 1)
            current = head[:-1]
            if current in rows:
                raise ParseError(f"table {current} given twice", lineno, 1)
            rows[current] = []
            continue
        if head == "sizes":
            kv = _keyvals(words[1:], lineno, line, ("x1", "x2", "y", "z"))
            for k, (v, col) in kv.items():
                sizes[k] = _number(v, lineno, col, int)
            current = None
            continue
        if head == "design":
            kv = _keyvals(words[1:], lineno, line, ("u", "v"))
            for k, (v, col) in kv.items():
                sizes[k] = _number(v, lineno, col, int)
            extras["design"] = True
            current = None
            continue
        if head == "rates":
            kv = _keyvals(words[1:], lineno, line, ("rd", "r0", "r1", "rs"))
            if set(kv) != {"rd", "r0", "r1", "rs"}:
                raise ParseError("rates needs rd, r0, r1 and rs", lineno, 1)
            extras["rates"] = {k: _number(v, lineno, c) for k, (v, c) in kv.items()}
            current = None
            continue
        if head in ("delta", "n", "seed"):
            if len(words) != 2:
                raise ParseError(f"{head} takes one value", lineno, 1)
            kind = float if head == "delta" else int
            extras[head] = _number(words[1], lineno, line.index(words[1], len(head)) + 1, kind)
            current = None
            continue
        if current is None:
            raise ParseError(f"unexpected {head!r}", lineno, line.index(head) + 1)
        vals, pos = [], 0
        for w in words:
            pos = line.index(w, pos)
            vals.append(_number(w, lineno, pos + 1))
            pos += len(w)
        rows[current].append((lineno, vals))

    for k in ("x1", "x2", "y", "z"):
        if k not in sizes:
            raise ParseError(f"missing size {k} (need a 'sizes x1=.. x2=.. y=.. z=..' line)")
    for k, v in sizes.items():
        if v < 1:
            raise DimensionError(f"size {k}={v} must be positive")

    def table(name):
        if name not in rows:
            raise DimensionError(f"missing table {name}")
        ins = _TABLES[name]
        shape = tuple(sizes[a] for a in ins)
        width = sizes[_OUT[name]]
        got = rows[name]
        want = int(np.prod(shape)) if shape else 1
        if len(got) != want:
            raise DimensionError(f"table {name} has {len(got)} rows, expected {want}")
        out = np.empty((want, width))
        for r, (lineno, vals) in enumerate(got):
            label = ", ".join(
                f"{a}={i}" for a, i in zip(ins, np.unravel_index(r, shape) if shape else ())
            )
            where = f"table {name} row {r + 1}" + (f" ({label})" if label else "")
            if len(vals) != width:
                raise DimensionError(
                    f"{where} on line {lineno} has {len(vals)} entries, expected {width}"
                )
            v = np.array(vals)
            if (v < 0).any():
                raise StochasticityError(f"{where} on line {lineno} has a negative entry")
            if abs(v.sum() - 1.0) > ROW_TOL:
                raise StochasticityError(
                    f"{where} on line {lineno} sums to {v.sum():.12g}, not 1"
                )
            out[r] = v / v.sum()
        return out.reshape(shape + (width,))

    py = Channel(table("Y"))
    pz = Channel(table("Z"))
    spec = ProblemSpec({k: sizes[k] for k in ("x1", "x2", "y", "z")}, py, pz)
    if extras.get("design"):
        for k in ("u", "v"):
            if k not in sizes:
                raise ParseError(f"design line needs {k}=")
        spec.sizes.update(u=sizes["u"], v=sizes["v"])
        spec.design = InputDesign(
            Dist(table("PX2")),
            Channel(table("PU|X2")),
            Channel(table("PV|UX2")),
            Channel(table("PX1|V")),
        )
    else:
        stray = [t for t in ("PX2", "PU|X2", "PV|UX2", "PX1|V") if t in rows]
        if stray:
            raise ParseError(f"design tables {stray} need a 'design u=.. v=..' line")
    if "rates" in extras:
        spec.rates = RateQuadruple(**extras["rates"])
    spec.delta = extras.get("delta")
    spec.n = extras.get("n")
    spec.seed = extras.get("seed")
    return spec


def parse_spec(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read(), str(path))


DEFAULT_SPEC = """\
sizes x1=2 x2=2 y=2 z=2
Y:
0.95 0.05
0.85 0.15
0.10 0.90
0.20 0.80
Z:
0.70 0.30
0.60 0.40
0.35 0.65
0.45 0.55
"""


def default_spec() -> ProblemSpec:
    return parse_text(DEFAULT_SPEC, "<default>")

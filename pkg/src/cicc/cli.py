"""Command-line front end.

Every subcommand writes CSV files into ``--out`` and a short summary to
standard output.  Exit status is 0 on success, 1 on invalid input or a
failed verification, and 2 on an unexpected internal error.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import traceback

import numpy as np

from . import codec, exponents, fmcheck, region, resolvability
from .errors import WorkbenchError
from .parallel import pmap
from .prob import Channel, Dist, random_design
from .region import RateQuadruple
from .specfile import default_spec, parse_spec

LN2 = math.log(2)
DESIGN_STREAM = 0x5EED
DEFAULT_RATE = LN2
THETA_STEPS = 20


class UsageError(WorkbenchError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------------------
# helpers


class Context:
    """Resolved inputs shared by the subcommands."""

    def __init__(self, args):
        self.args = args
        self.spec = parse_spec(args.spec) if args.spec else default_spec()
        self.seed = args.seed if args.seed is not None else (self.spec.seed or 0)
        self.scale = 1 / LN2 if args.bits else 1.0
        os.makedirs(args.out, exist_ok=True)

    def info(self, x) -> float:
        """Convert a nat-valued quantity for output."""
        return float(x) * self.scale

    def path(self, name: str) -> str:
        return os.path.join(self.args.out, name)

    def write(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    @property
    def sizes(self):
        return self.spec.sizes

    def design(self):
        if self.spec.design is not None:
            return self.spec.design
        rng = np.random.default_rng([self.seed, DESIGN_STREAM])
        return random_design(rng, self.sizes["x1"], self.sizes["x2"], 2, 2)

    def rates(self) -> RateQuadruple:
        raw = getattr(self.args, "rates", None)
        if raw is not None:
            try:
                vals = [float(x) for x in raw.split(",")]
            except ValueError:
                raise UsageError(f"--rates expects four numbers, got {raw!r}") from None
            if len(vals) != 4:
                raise UsageError(f"--rates expects rd,r0,r1,rs, got {raw!r}")
            if self.args.bits:
                vals = [v * LN2 for v in vals]
            return RateQuadruple(*vals)
        if self.spec.rates is not None:
            r = self.spec.rates
            if self.args.bits:
                return RateQuadruple(*(v * LN2 for v in r.as_tuple()))
            return r
        return RateQuadruple(*([DEFAULT_RATE] * 4))

    def delta(self) -> float:
        d = self.args.delta if self.args.delta is not None else self.spec.delta
        d = 0.0 if d is None else d
        return d * LN2 if self.args.bits else d

    def n(self, default: int) -> int:
        n = self.args.n if self.args.n is not None else self.spec.n
        n = default if n is None else n
        if n < 1:
            raise UsageError("--n must be at least 1")
        return n

    def r1_split(self):
        s = getattr(self.args, "r1_split", None)
        if s is None:
            return None
        return s * LN2 if self.args.bits else s


def _check_theta(args):
    for name in ("theta", "theta2"):
        t = getattr(args, name, None)
        if t is not None and not 0 < t <= 1:
            raise UsageError(f"--{name} must lie in (0, 1]")


# ---------------------------------------------------------------------------
# subcommands


def cmd_region(ctx: Context) -> int:
    a = ctx.args
    s = ctx.sizes
    pairs = region.sample_designs(
        s["x1"], s["x2"], ctx.spec.py, ctx.spec.pz, a.instances, ctx.seed,
        a.u_max, a.v_max, a.workers,
    )
    info_rows, point_rows, sys_rows, points = [], [], [], []
    for idx, (design, iv) in enumerate(pairs):
        cap = region.capacity_region(iv)
        ext = region.extreme_points(cap)
        nonempty = any(p is not None for p in ext.values())
        info_rows.append(
            [idx, design.sizes["U"], design.sizes["V"]]
            + [ctx.info(v) for v in iv.as_dict().values()]
            + [int(nonempty)]
        )
        for row in cap.rows:
            sys_rows.append(
                [idx, row.tag] + [float(c) for c in row.coeffs]
                + ["<=", ctx.info(row.rhs)]
            )
        for name, p in ext.items():
            if p is not None:
                points.append(p)
                point_rows.append([idx, name] + [ctx.info(x) for x in p])
    hull = set(region.hull_vertices(points)) if points else set()
    for k, row in enumerate(point_rows):
        row.append(int(k in hull))
    cols = list(region.RATES)
    ctx.write(
        "region_info.csv",
        ["instance", "u_size", "v_size"] + list(region.InfoVector.zeros().as_dict())
        + ["nonempty"],
        info_rows,
    )
    ctx.write("region_points.csv", ["instance", "direction"] + cols + ["hull"], point_rows)
    ctx.write(
        "region_hull.csv", cols,
        [[ctx.info(x) for x in points[k]] for k in sorted(hull)],
    )
    ctx.write(
        "region_systems.csv", ["instance", "tag"] + cols + ["sense", "rhs"], sys_rows
    )
    print(
        f"region: {len(pairs)} designs, {len(points)} extreme points, "
        f"{len(hull)} hull vertices"
    )
    return 0


def _verify_row(iv):
    rep = fmcheck.verify_elimination(iv)
    cert = "none" if rep.certificate is None else f"{rep.certificate[0]}:{rep.certificate[1]}"
    return [
        int(rep.projection_ok), cert, int(rep.redundant_ok), int(rep.region_ok),
        int(rep.nonempty), int(rep.passed),
    ] + [kept for _, _, kept in rep.sizes]


def cmd_fm_verify(ctx: Context) -> int:
    a = ctx.args
    s = ctx.sizes
    ivs = region.random_info_vectors(
        a.instances, ctx.seed, (s["x1"], s["x2"], s["y"], s["z"]), workers=a.workers
    )
    rows = pmap(_verify_row, ivs, a.workers)
    header = [
        "instance", "projection_ok", "certificate", "redundant_ok", "region_ok",
        "nonempty", "passed",
    ] + [f"rows_after_{v}" for v in fmcheck.ELIMINATION_ORDER]
    ctx.write("fm_verify.csv", header, [[i] + r for i, r in enumerate(rows)])
    passed = sum(r[5] for r in rows)
    nonempty = sum(r[4] for r in rows)
    print(f"fm-verify: {passed}/{len(rows)} passed ({nonempty} with a nonempty region)")
    return 0 if passed == len(rows) else 1


def cmd_exponent(ctx: Context) -> int:
    a = ctx.args
    _check_theta(a)
    design, pz = ctx.design(), ctx.spec.pz
    design.check_channels(ctx.spec.py, pz)
    outer, inner = exponents.outer_spec(design, pz), exponents.inner_spec(design, pz)
    grid = [k / THETA_STEPS for k in range(THETA_STEPS + 1)]
    ctx.write("psi_outer.csv", ["theta", "psi"],
              [[t, ctx.info(exponents.psi(t, outer))] for t in grid])
    ctx.write("psi_inner.csv", ["theta", "psi"],
              [[t, ctx.info(exponents.psi(t, inner))] for t in grid])
    slope_rows = []
    for name, sp in (("outer", outer), ("inner", inner)):
        fd, mi = exponents.psi_prime_at_zero(sp)
        slope_rows.append([name, ctx.info(fd), ctx.info(mi)])
    ctx.write("psi_slope.csv", ["spec", "finite_difference", "mutual_information"], slope_rows)

    rates, delta = ctx.rates(), ctx.delta()
    iv = region.info_vector(design, ctx.spec.py, pz)
    split = ctx.r1_split()
    split = codec.default_r1_split(rates, iv) if split is None else split
    table, curve = [], []
    for n in range(1, ctx.n(4) + 1):
        sizes = codec.sizes_from_rates(rates, split, delta, n)
        if a.theta is not None and a.theta2 is not None:
            t1, t2 = a.theta, a.theta2
            b = exponents.leakage_bound(sizes.a, sizes.j, t1, t2, design, pz, n)
        else:
            t1, t2, b = exponents.optimize_theta(sizes.a, sizes.j, design, pz, n)
            if a.theta is not None or a.theta2 is not None:
                t1 = a.theta if a.theta is not None else t1
                t2 = a.theta2 if a.theta2 is not None else t2
                b = exponents.leakage_bound(sizes.a, sizes.j, t1, t2, design, pz, n)
        table.append([n, sizes.a, sizes.j, t1, t2, ctx.info(b)])
        curve.append([n, ctx.info(b)])
    ctx.write("bound.csv", ["n", "bound"], curve)
    ctx.write("bound_table.csv", ["n", "a_size", "j_size", "theta", "theta2", "bound"], table)
    print(f"exponent: psi on {len(grid)} points, leakage bound for n=1..{len(table)}")
    return 0


def cmd_simulate(ctx: Context) -> int:
    a = ctx.args
    _check_theta(a)
    rep = codec.experiment(
        ctx.design(), ctx.spec.py, ctx.spec.pz, ctx.rates(), ctx.delta(), ctx.n(1),
        a.codebooks, ctx.seed, ctx.r1_split(), a.workers, a.theta, a.theta2,
    )

    def metric_row(label, d):
        return [label, d["perr_bob"], d["perr_eve"], ctx.info(d["leakage"])]

    rows = [metric_row(t, r) for t, r in enumerate(rep.trials)]
    rows += [metric_row("mean", rep.mean), metric_row("stderr", rep.stderr),
             metric_row("bound", rep.bound)]
    ctx.write("simulate.csv", ["trial", "perr_bob", "perr_eve", "leakage"], rows)
    setup = [["n", rep.n], ["codebooks", a.codebooks], ["seed", ctx.seed]]
    setup += [[f"size_{k}", v] for k, v in rep.sizes.as_dict().items()]
    setup += [[k, ctx.info(v)] for k, v in rep.thresholds.as_dict().items()]
    setup += [["theta", rep.theta], ["theta2", rep.theta2]]
    setup += [note.split("=", 1) for note in rep.notes]
    ctx.write("simulate_setup.csv", ["key", "value"], setup)
    held = rep.holds()
    print(
        "simulate: "
        + ", ".join(
            f"{m} mean {rep.mean[m]:.6g} vs bound {rep.bound[m]:.6g}"
            f" ({'ok' if held[m] else 'EXCEEDED'})"
            for m in codec.METRICS
        )
    )
    return 0


def _pairs(text: str):
    out = []
    for item in text.split(","):
        try:
            m1, m2 = (int(x) for x in item.lower().split("x"))
        except ValueError:
            raise UsageError(f"--pairs expects items like 4x4, got {item!r}") from None
        if m1 < 1 or m2 < 1:
            raise UsageError("map sizes must be positive")
        out.append((m1, m2))
    return out


def cmd_resolve(ctx: Context) -> int:
    a = ctx.args
    _check_theta(a)
    design = ctx.design()
    pv = Dist(design.joint_uvx2().sum(axis=(0, 2)))
    # one-shot channel X1 -> Z with X2 averaged out under its design law
    pzx = Channel(np.einsum("b,dbz->dz", design.p_x2.p, ctx.spec.pz.table))
    summary, trials = [], []
    for m1, m2 in _pairs(a.pairs):
        rep = resolvability.trials(
            pv, design.p_x1_given_v, pzx, m1, m2, a.codebooks, ctx.seed,
            a.workers, a.theta, a.theta2,
        )
        summary.append([m1, m2, a.codebooks, rep.theta, rep.theta2, ctx.info(rep.mean),
                        ctx.info(rep.stderr), ctx.info(rep.bound), int(rep.holds)])
        trials += [[m1, m2, t, ctx.info(d)] for t, d in enumerate(rep.divergences)]
    ctx.write("resolve.csv", ["m1", "m2", "maps", "theta", "theta2", "mean", "stderr",
                              "bound", "holds"], summary)
    ctx.write("resolve_trials.csv", ["m1", "m2", "trial", "divergence"], trials)
    ok = sum(r[-1] for r in summary)
    print(f"resolve: bound holds for {ok}/{len(summary)} size pairs")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--spec", help="problem file (default: built-in binary example)")
    common.add_argument("--seed", type=int, help="master seed (default: file value or 0)")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--bits", action="store_true",
                        help="read rates and write information quantities in bits")

    p = _Parser(prog="cicc", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser(
        "region", parents=[common], help="sample designs and tabulate the rate region",
        description="Writes region_info.csv (instance, u_size, v_size, the eight "
        "information quantities, nonempty), region_points.csv (instance, direction, "
        "rd, r0, r1, rs, hull), region_hull.csv (rd, r0, r1, rs) and "
        "region_systems.csv (instance, tag, coefficients of rd, r0, r1, rs, sense, rhs).",
    )
    r.add_argument("--instances", type=int, default=20, help="number of designs")
    r.add_argument("--u-max", type=int, default=None, help="cap on the U alphabet")
    r.add_argument("--v-max", type=int, default=None, help="cap on the V alphabet")
    r.set_defaults(func=cmd_region)

    f = sub.add_parser(
        "fm-verify", parents=[common], help="check the slack elimination on random instances",
        description="Writes fm_verify.csv (instance, projection_ok, certificate, "
        "redundant_ok, region_ok, nonempty, passed, rows kept after each slack "
        "elimination).  Exits 1 unless every instance passes.",
    )
    f.add_argument("--instances", type=int, default=200)
    f.set_defaults(func=cmd_fm_verify)

    e = sub.add_parser(
        "exponent", parents=[common], help="exponent curves and leakage bounds",
        description="Writes psi_outer.csv and psi_inner.csv (theta, psi), psi_slope.csv "
        "(spec, finite_difference, mutual_information), bound.csv (n, bound) and "
        "bound_table.csv (n, a_size, j_size, theta, theta2, bound).  Without --theta "
        "and --theta2 the exponents are optimized.",
    )
    _rate_flags(e)
    e.add_argument("--n", type=int, help="largest blocklength in the bound table (default 4)")
    e.set_defaults(func=cmd_exponent)

    s = sub.add_parser(
        "simulate", parents=[common], help="exact codebook experiment",
        description="Writes simulate.csv (trial, perr_bob, perr_eve, leakage, one row "
        "per codebook followed by mean, stderr and bound rows) and simulate_setup.csv "
        "(key, value).",
    )
    _rate_flags(s)
    s.add_argument("--n", type=int, help="blocklength (default 1)")
    s.add_argument("--codebooks", type=int, default=200)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser(
        "resolve", parents=[common], help="one-shot resolvability trials",
        description="Writes resolve.csv (m1, m2, maps, theta, theta2, mean, stderr, "
        "bound, holds) and resolve_trials.csv (m1, m2, trial, divergence).",
    )
    v.add_argument("--pairs", default="2x2,4x4,8x8", help="comma-separated m1xm2 sizes")
    v.add_argument("--codebooks", type=int, default=1000, help="random maps per pair")
    v.add_argument("--theta", type=float)
    v.add_argument("--theta2", type=float)
    v.set_defaults(func=cmd_resolve)
    return p


def _rate_flags(p):
    p.add_argument("--rates", help="rd,r0,r1,rs (default: log 2 nats each)")
    p.add_argument("--delta", type=float, help="rate back-off (default 0)")
    p.add_argument("--r1-split", type=float, help="part of r1 decoded by the eavesdropper")
    p.add_argument("--theta", type=float)
    p.add_argument("--theta2", type=float)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        return args.func(Context(args))
    except WorkbenchError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())

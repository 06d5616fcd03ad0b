"""Command-line front end: ``xsplanes <subcommand> [options]``.

Exit status: 0 on success, 1 when a verification or closed-form check
fails, 2 on usage errors.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from xsplanes import montecarlo as mc
from xsplanes import plane_analysis as pa
from xsplanes import pointcloud as pc
from xsplanes import xor_arith as xa
from xsplanes.generators import GenSpec, XsParams, parse_gen_spec, seed_schedule
from xsplanes.montecarlo import parse_rational


class UsageError(Exception):
    pass


def parse_count(text):
    """Positive integer; accepts ``2e11`` and ``2*10^11`` style input."""
    try:
        if "e" in text.lower() and "^" not in text:
            mant, exp = text.lower().split("e")
            val = parse_rational(mant) * 10 ** int(exp)
        else:
            val = parse_rational(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if val.denominator != 1 or val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(val)


def parse_u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text!r}")
    return v


@dataclass
class RunConfig:
    """Validated settings shared by the subcommands."""

    command: str
    gen: GenSpec | None = None
    seed: int = 0
    options: dict = field(default_factory=dict)


def _gen_from_args(args):
    given = [v for v in (args.preset, args.params, getattr(args, "gen", None)) if v is not None]
    if len(given) > 1:
        raise UsageError("give at most one of --preset, --params, --gen")
    try:
        if args.params is not None:
            parts = args.params.split(",")
            if len(parts) != 3:
                raise ValueError("--params needs a,b,c")
            return GenSpec(XsParams(*(int(v) for v in parts)))
        if getattr(args, "gen", None) is not None:
            return parse_gen_spec(args.gen)
        return GenSpec(XsParams.preset(args.preset if args.preset is not None else 1))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_config(args):
    options = {k: v for k, v in vars(args).items()
               if k not in ("command", "preset", "params", "gen", "seed", "func")}
    gen = _gen_from_args(args) if hasattr(args, "preset") else None
    return RunConfig(command=args.command, gen=gen, seed=getattr(args, "seed", 0), options=options)


# -- subcommands -------------------------------------------------------------

def cmd_generate(cfg, out):
    o = cfg.options
    gen = cfg.gen.make(cfg.seed)
    if o["linear"]:
        if cfg.gen.params is None:
            raise UsageError("--linear applies to xorshift128+ only")
        gen.linear = True
    words = gen.fill(o["count"])
    if o["csv"]:
        out.write("index,word,unit\n")
        for i, w in enumerate(words.tolist()):
            out.write(f"{i},{w},{format(w / 2.0**64, '.17g')}\n")
    else:
        out.write("".join(f"{w:#018x}\n" for w in words.tolist()))
    return 0


def cmd_points(cfg, out):
    o = cfg.options
    spec = pc.MagnifySpec(o["magnify"], o["axis"])
    cloud = pc.extract_magnified(cfg.gen, cfg.seed, spec, o["count"], streams=o["streams"])
    meshes = []
    if o["with_planes"] and cfg.gen.params is not None:
        x_max = 2.0 ** -o["magnify"]
        meshes = [pc.plane_mesh(cfg.gen.params.a, s, x_max, o["grid"])
                  for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    paths = pc.emit_artifacts(cloud.unit_points(), meshes, o["out"])
    out.write(f"generator {cfg.gen.label}, seed {cfg.seed}, {o['streams']} streams\n")
    out.write(f"magnify {spec.axis} by 2^{spec.k}: {len(cloud.raw)} points from "
              f"{cloud.consumed} triples (acceptance {len(cloud.raw) / cloud.consumed:.4e}, "
              f"expected {2.0 ** -spec.k:.4e})\n")
    if cfg.gen.params is not None:
        d = pa.nearest_plane_distance(cloud.raw[:, 0], cloud.raw[:, 1], cloud.raw[:, 2],
                                      cfg.gen.params.a)
        frac = float(np.mean(d <= np.uint64(2**61)))
        out.write(f"within 2^-3 of one of the eight planes: {frac:.4f}\n")
    for p in paths:
        out.write(p + "\n")
    return 0


def cmd_planes(cfg, out):
    o = cfg.options
    x_max = float(parse_rational(o["xmax"]))
    patterns = o["signs"] or ["++", "+-", "-+", "--"]
    try:
        meshes = [pc.plane_mesh(o["a"], pc.parse_sign_pair(s), x_max, o["grid"]) for s in patterns]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for p in pc.emit_artifacts(None, meshes, o["out"]):
        out.write(p + "\n")
    return 0


def _fmt_pred(pred):
    return pred if isinstance(pred, str) else f"{pred} = {float(pred):.6f}"


def cmd_concentrate(cfg, out):
    o = cfg.options
    params = cfg.gen.params
    try:
        rep = pa.scan_concentration(params, cfg.seed, o["samples"], o["n"], o["overlapping"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    window = "overlapping" if rep.overlapping else "non-overlapping"
    out.write(f"xorshift128+{params}  seed {rep.seed}  M={rep.samples} {window} triples  n={rep.n}\n")
    out.write(f"residual bound 4(2^(64-n)-1) = {rep.bound} ({rep.bound / 2**64:.6f} normalized); "
              f"chance near-plane fraction {float(pa.chance_fraction(rep.n)):.6f}\n")
    head = f"{'signs':<11}{'plane':<24}{'A1&A2 freq':>12}  {'predicted':<32}{'max|res|/2^64':>14}{'viol':>6}{'near':>10}"
    out.write(head + "\n")
    for row in rep.rows:
        viol = str(row.violations) if row.admissible else "-"
        out.write(f"{str(row.plane.signs):<11}{str(row.plane):<24}{rep.frequency(row):>12.6f}  "
                  f"{_fmt_pred(row.predicted):<32}{row.max_abs_residual / 2**64:>14.6f}{viol:>6}"
                  f"{rep.near_fraction(row):>10.6f}\n")
    out.write(f"bound compliance: {'yes' if rep.compliant else 'NO'}\n")
    if o["csv"]:
        lines = ["p,q,r,a,samples,n,condition_count,frequency,predicted,max_abs_residual,violations,near_count"]
        for row in rep.rows:
            pred = "" if isinstance(row.predicted, str) else str(row.predicted)
            lines.append(",".join(map(str, (*row.plane.signs, params.a, rep.samples, rep.n,
                                             row.condition_count, rep.frequency(row), pred,
                                             row.max_abs_residual, row.violations, row.near_count))))
        pc._write(o["csv"], "\n".join(lines) + "\n")
    return 0 if rep.compliant else 1


def cmd_count(cfg, out):
    n = cfg.options["n"]
    rows = []
    if n <= xa.PAIR_MAX_N:
        rep = xa.pair_counts(n)
        for fam, got, want in (("", rep.plain, xa.pair_closed_form(n)),
                               ("'", rep.modular, xa.pair_closed_form(n, True))):
            for key in ("a", "b", "c", "ab", "bc", "ca", "abc", "union"):
                name = "#" + "".join(ch.upper() + fam for ch in key) if key != "union" else f"#(A{fam}|B{fam}|C{fam})"
                rows.append(("pairs", name, getattr(got, key), getattr(want, key), rep.total))
    if n <= xa.TRIPLE_MAX_N:
        for s in xa.ALL_SIGNS:
            for modular in (False, True):
                want = xa.triple_closed_form(n, s, modular)
                label = f"xor=pu+qv+rw{' mod 2^n' if modular else ''} {s}"
                rows.append(("triples", label, xa.triple_count(n, s, modular), want, 8**n))
    if n <= xa.QUAD_MAX_N:
        for s in xa.ADMISSIBLE_SIGNS:
            count, _ = xa.joint_condition_count(n, s)
            want = xa.joint_closed_form(n, s) * 16**n
            rows.append(("quadruples", f"A1&A2 {s}", count, int(want), 16**n))
    mismatches = sum(1 for r in rows if r[3] is not None and r[2] != r[3])
    if cfg.options["csv"]:
        out.write("group,quantity,count,closed_form,total,match\n")
        for g, name, got, want, total in rows:
            match = "" if want is None else ("yes" if got == want else "NO")
            out.write(f"{g},{name},{got},{'' if want is None else want},{total},{match}\n")
    else:
        out.write(f"n = {n}\n")
        for g, name, got, want, total in rows:
            flag = "" if want is None else ("ok" if got == want else "MISMATCH")
            w = "-" if want is None else str(want)
            out.write(f"{g:<11}{name:<36}{got:>12}/{total:<12}closed form {w:<12}{flag}\n")
        out.write(f"{mismatches} mismatches\n")
    return 1 if mismatches else 0


def cmd_mc(cfg, out):
    o = cfg.options
    try:
        region = mc.BoxRegion.parse(o["region"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 0 < region.volume < 1:
        raise UsageError("region volume must lie strictly between 0 and 1")
    seeds = seed_schedule(cfg.seed, o["repeats"])

    def run(s):
        return mc.McReport(cfg.gen.label, s, o["n"],
                           mc.box_hits(cfg.gen, s, region, o["n"], o["lanes"]), region.volume)

    with ThreadPoolExecutor(max_workers=o["threads"]) as pool:
        reports = list(pool.map(run, seeds))
    out.write(mc.format_csv(reports) if o["csv"] else mc.format_table(reports, region))
    return 0


def cmd_verify(cfg, out):
    from xsplanes.verify import run_all

    return 0 if run_all(out) else 1


# -- parser ------------------------------------------------------------------

def _add_gen(p, allow_control=False):
    p.add_argument("--preset", type=int, help="recommended parameter set 1..8 (default 1: 23,17,26)")
    p.add_argument("--params", help="explicit shifts a,b,c")
    if allow_control:
        p.add_argument("--gen", help="generator spec: control, xs:preset-K or xs:A,B,C")
    p.add_argument("--seed", type=parse_u64, default=0, help="64-bit seed (default 0)")


def make_parser():
    parser = argparse.ArgumentParser(prog="xsplanes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="raw 64-bit output stream")
    _add_gen(p, allow_control=True)
    p.add_argument("--count", type=parse_count, default=10, help="number of outputs (default 10)")
    p.add_argument("--linear", action="store_true", help="xor output s_i ^ s_i+1 instead of the sum")
    p.add_argument("--csv", action="store_true", help="index,word,unit rows instead of hex words")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("points", help="magnified 3D point cloud (CSV + gnuplot script)")
    _add_gen(p, allow_control=True)
    p.add_argument("--magnify", type=int, default=22, help="keep 2^k*u <= 1 and plot 2^k*u (default 22)")
    p.add_argument("--axis", choices=pc.AXES, default="x", help="magnified axis (default x)")
    p.add_argument("--count", type=parse_count, default=10000, help="points to collect (default 10000)")
    p.add_argument("--streams", type=int, default=pc.DEFAULT_STREAMS,
                   help=f"interleaved generator instances (default {pc.DEFAULT_STREAMS}; 1 = single stream)")
    p.add_argument("--with-planes", action="store_true", help="also write the four reference planes")
    p.add_argument("--grid", type=int, default=65, help="mesh grid resolution (default 65)")
    p.add_argument("--out", default="points_out", help="output directory (default points_out)")
    p.set_defaults(func=cmd_points)

    p = sub.add_parser("planes", help="reference plane meshes z = +-(1+2^a)x +- y mod 1")
    p.add_argument("--a", type=int, default=23, help="shift a (default 23)")
    p.add_argument("--signs", action="append", help="sign pattern such as ++ or +- (repeatable; default all four)")
    p.add_argument("--xmax", default="2^-23", help="x range upper end (default 2^-23)")
    p.add_argument("--grid", type=int, default=65, help="grid points per axis (default 65)")
    p.add_argument("--out", default="planes_out", help="output directory (default planes_out)")
    p.set_defaults(func=cmd_planes)

    p = sub.add_parser("concentrate", help="A1/A2 frequencies and residual bound per plane")
    _add_gen(p)
    p.add_argument("--samples", type=parse_count, default=10**6, help="triples M (default 1e6)")
    p.add_argument("--n", type=int, default=pa.DEFAULT_DEPTH, help="MSB depth (default 5)")
    p.add_argument("--overlapping", action="store_true", help="sliding windows instead of disjoint triples")
    p.add_argument("--csv", help="also write per-plane rows to this CSV file")
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("count", help="exhaustive xor-vs-sum counts against closed forms")
    p.add_argument("--n", type=int, required=True, help=f"bit width 1..{xa.PAIR_MAX_N}")
    p.add_argument("--csv", action="store_true", help="CSV instead of a plain table")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("mc", help="hit-or-miss Monte Carlo volume of a box")
    _add_gen(p, allow_control=True)
    p.add_argument("--region", default=mc.DEFAULT_REGION_TEXT,
                   help=f"x0,x1,y0,y1,z0,z1 as decimals or rationals (default {mc.DEFAULT_REGION_TEXT})")
    p.add_argument("--n", type=parse_count, default=2 * 10**11, help="triples per run (default 2e11)")
    p.add_argument("--repeats", type=int, default=3, help="independent runs (default 3)")
    p.add_argument("--lanes", type=int, default=mc.DEFAULT_LANES,
                   help=f"generator instances per run (default {mc.DEFAULT_LANES})")
    p.add_argument("--threads", type=int, default=1, help="runs executed concurrently (default 1)")
    p.add_argument("--csv", action="store_true", help="CSV instead of a plain table")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", help="run the built-in theorem and invariant checks")
    p.set_defaults(func=cmd_verify)
    return parser


def _validate(cfg):
    o = cfg.options
    for key in ("streams", "lanes", "threads", "repeats"):
        if key in o and o[key] < 1:
            raise UsageError(f"--{key} must be >= 1")
    if "grid" in o and o["grid"] < 2:
        raise UsageError("--grid must be >= 2")
    if cfg.command == "count" and not 1 <= o["n"] <= xa.PAIR_MAX_N:
        raise UsageError(f"--n must be in 1..{xa.PAIR_MAX_N}")
    if cfg.command == "points" and not 0 <= o["magnify"] <= 63:
        raise UsageError("--magnify must be in 0..63")
    if cfg.command == "planes" and not 1 <= o["a"] <= 63:
        raise UsageError("--a must be in 1..63")


def run(argv=None, out=None):
    out = out or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        _validate(cfg)
        return args.func(cfg, out)
    except UsageError as exc:
        parser.error(str(exc))


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

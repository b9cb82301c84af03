"""Command line: ``tnrenorm {init,norm,sweep,plot}``."""

import argparse
import json
import math
import re
import sys

from . import harness, io
from .network import InitParams, build_peps, build_tt, build_ttm
from .norms import (FROBENIUS, LINEAR, METHODS, frobenius_norm_sq,
                    linear_norm, log_norm_reference)
from .protocols import RenormConfig, renormalize


_RANGE = re.compile(r"^(-?\d+)-(-?\d+)(?::(\d+))?$")


def int_list(text):
    """Parse ``"2-34"``, ``"2-34:4"``, ``"6,8,10"`` or mixtures of those."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = _RANGE.match(part)
        if m:
            lo, hi, step = int(m[1]), int(m[2]), int(m[3] or 1)
            out.extend(range(lo, hi + 1, step))
        else:
            try:
                out.append(int(part))
            except ValueError:
                raise argparse.ArgumentTypeError(
                    f"bad integer list item {part!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list {text!r}")
    return out


def str_list(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def target_arg(text):
    if text == "auto":
        return text
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("target must be 'auto' or a positive number")
    return value


def _add_protocol_flags(p):
    p.add_argument("--target", type=target_arg, default="auto",
                   help="'auto' or a positive number")
    p.add_argument("--range-lo", type=float, default=1e-3)
    p.add_argument("--range-hi", type=float, default=1e3)
    p.add_argument("--max-steps", type=int, default=1000)


def _add_init_flags(p):
    p.add_argument("--mean", type=float, default=1.0)
    p.add_argument("--std", type=float, default=0.5)
    p.add_argument("--positive", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="absolute-value Gaussian (default: on for linear)")


def cmd_init(args):
    method = args.method
    positive = args.positive if args.positive is not None else method == LINEAR
    init = InitParams(args.mean, args.std, args.seed, positive)
    if args.structure == "TT":
        tn = build_tt(args.nodes, args.phys, args.bond, init)
    elif args.structure == "TTM":
        tn = build_ttm(args.nodes, args.phys,
                       args.phys_in if args.phys_in else args.phys,
                       args.bond, init)
    else:
        tn = build_peps(args.rows, args.cols, args.phys, args.bond, init)
    target = None if args.target == "auto" else args.target
    cfg = RenormConfig(target=target, range_lo=args.range_lo,
                       range_hi=args.range_hi, max_steps=args.max_steps,
                       xi_seed=args.xi_seed, method=method)
    rep = renormalize(tn, cfg)
    if args.out:
        io.save_network(tn, args.out)
    summary = rep.to_dict()
    if not args.trace:
        summary.pop("trace")
    print(json.dumps(summary, indent=2))
    return 0 if rep.succeeded else 2


def cmd_norm(args):
    tn = io.load_network(args.path)
    sq = frobenius_norm_sq(tn)
    lin = linear_norm(tn)
    out = {
        "structure": tn.structure,
        "nodes": tn.n_nodes,
        "frobenius_norm_sq": str(sq),
        "frobenius_norm": str(sq.sqrt()),
        "linear_norm": str(lin),
    }
    if tn.structure in ("TT", "TTM"):
        out["log_frobenius_norm_sq"] = log_norm_reference(tn, FROBENIUS)
        out["log_linear_norm"] = log_norm_reference(tn, LINEAR)
    print(json.dumps(out, indent=2))
    return 0


def _spec_from_args(args):
    if args.spec:
        doc = io.load_document(args.spec)
        if args.no_timing:
            doc["timing"] = False
        return harness.SweepSpec.from_dict(doc)
    return harness.SweepSpec(
        structures=args.structure, methods=args.method, n_values=args.nodes,
        p_values=args.phys, b_values=args.bond, seeds=args.seeds,
        mean=args.mean, std=args.std,
        positive={FROBENIUS: bool(args.positive),
                  LINEAR: args.positive is None or args.positive},
        target=args.target, range_lo=args.range_lo, range_hi=args.range_hi,
        max_steps=args.max_steps, max_node_floats=args.max_node_floats,
        timing=not args.no_timing)


def cmd_sweep(args):
    spec = _spec_from_args(args)
    done = [0]
    total = len(spec.combinations())

    def progress(_row):
        done[0] += 1
        if args.verbose:
            print(f"\r{done[0]}/{total}", end="", file=sys.stderr)

    rows = harness.run_sweep(spec, jobs=args.jobs, progress=progress)
    if args.verbose:
        print(file=sys.stderr)
    harness.write_csv(rows, args.csv or sys.stdout)
    if args.out:
        from .plotting import plot_steps
        plot_steps(rows, args.x_axis, args.series, args.out)
    failed = sum(r.status == "Failed" for r in rows)
    skipped = sum(r.status == harness.SKIPPED for r in rows)
    print(f"{len(rows)} runs, {failed} failed, {skipped} skipped",
          file=sys.stderr)
    return 0


def _where(items):
    where = {}
    for item in items or ():
        key, _, value = item.partition("=")
        if key in ("N", "p", "b", "seed"):
            where[key] = int(value)
        else:
            where[key] = value
    return where


def cmd_plot(args):
    from .plotting import plot_steps
    rows = harness.filter_rows(harness.read_csv(args.csv), **_where(args.where))
    plot_steps(rows, args.x_axis, args.series, args.out)
    return 0


def make_parser():
    parser = argparse.ArgumentParser(
        prog="tnrenorm",
        description="Partial-norm renormalization of tensor-network layers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="build, normalize and save one network")
    p.add_argument("--structure", choices=("TT", "TTM", "PEPS"), default="TT")
    p.add_argument("--nodes", type=int, default=4)
    p.add_argument("--rows", type=int, default=2)
    p.add_argument("--cols", type=int, default=2)
    p.add_argument("--phys", type=int, default=2)
    p.add_argument("--phys-in", type=int, default=None,
                   help="TT-M input dimension (default: --phys)")
    p.add_argument("--bond", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--xi-seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default=FROBENIUS)
    p.add_argument("--trace", action="store_true",
                   help="include the rescaling trace in the report")
    p.add_argument("--out", help="network file to write")
    _add_init_flags(p)
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("norm", help="report the norms of a saved network")
    p.add_argument("path")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("sweep", help="run a parameter sweep to CSV")
    p.add_argument("--spec", help="JSON sweep spec (overrides grid flags)")
    p.add_argument("--structure", type=str_list, default=["TT", "TTM"])
    p.add_argument("--method", type=str_list, default=[FROBENIUS])
    p.add_argument("--nodes", type=int_list, default=[2, 3])
    p.add_argument("--phys", type=int_list, default=[2])
    p.add_argument("--bond", type=int_list, default=[10])
    p.add_argument("--seeds", type=int_list, default=[0])
    p.add_argument("--max-node-floats", type=int, default=10_000_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_ms as 0 for byte-stable output")
    p.add_argument("--csv", help="CSV output (default: stdout)")
    p.add_argument("--out", help="also render an SVG chart here")
    p.add_argument("--x-axis", choices=("N", "p", "b"), default="N")
    p.add_argument("--series", default=None,
                   help="series columns, e.g. 'p,structure'")
    p.add_argument("-v", "--verbose", action="store_true")
    _add_init_flags(p)
    _add_protocol_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render a sweep CSV to SVG")
    p.add_argument("csv")
    p.add_argument("--x-axis", choices=("N", "p", "b"), default="N")
    p.add_argument("--series", default=None)
    p.add_argument("--where", action="append", metavar="COL=VALUE",
                   help="keep only matching rows (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"tnrenorm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

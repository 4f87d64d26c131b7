"""Command-line entry point.

Exit codes: 0 ok, 2 usage or parse error, 3 marginal verdict, 4 non-generic
first layer, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import linear_core as lc
from .arrangement import enumerate_regions, facet_statistics, random_generic, region_counts
from .errors import CountOverflow, DegenerateRow, DimensionMismatch, MarginalVerdict, NotGeneric
from .experiments import (check_c0_relation, conjecture_sweep, estimate_prob_stable, facet_report,
                          reference_level)
from .network import Distribution, NetworkParams
from .output import reports_csv, reports_json, sweep_svg, table_csv, to_json
from .stability import NeuronRef, is_stably_unactivated_exact

EXIT_OK, EXIT_USAGE, EXIT_MARGINAL, EXIT_NOT_GENERIC, EXIT_IO = 0, 2, 3, 4, 5
CROSS_CHECK_MAX_M = 10
CROSS_CHECK_MAX_N = 4


class UsageError(Exception):
    pass


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _distribution(text):
    try:
        return Distribution.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _default_seed():
    env = os.environ.get("DEADNEURON_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"DEADNEURON_SEED must be an integer, got {env!r}")


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as f:
        f.write(text)


# --- commands -----------------------------------------------------------------------

def cmd_counts(args) -> int:
    regions, bounded = region_counts(args.m, args.n)
    line = f"regions={regions} bounded={bounded}"
    if args.m > args.n:
        total, avg = facet_statistics(args.m, args.n)
        line += f" facets={total} avg_facets={avg}"
    print(line)
    if args.m <= CROSS_CHECK_MAX_M and args.n <= CROSS_CHECK_MAX_N:
        rng = np.random.default_rng(args.seed)
        arr = random_generic(args.m, args.n, rng)
        regs = enumerate_regions(arr, facets=args.m > args.n)
        nb = sum(r.bounded for r in regs)
        ok = len(regs) == regions and nb == bounded
        print(f"enumerated regions={len(regs)} bounded={nb} {'ok' if ok else 'MISMATCH'}")
        if not ok:
            return 1
    return EXIT_OK


def _load_params(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return NetworkParams.from_json(text)
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc


def cmd_decide(args) -> int:
    params = _load_params(args.params)
    try:
        verdict = is_stably_unactivated_exact(params, NeuronRef(2, args.neuron), eps=args.tolerance,
                                              exact=args.exact)
    except MarginalVerdict as exc:
        print(exc.verdict.to_json())
        print("marginal verdict: supremum within tolerance of zero", file=sys.stderr)
        return EXIT_MARGINAL
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(verdict.to_json())
    return EXIT_OK


def _check_format(args, allowed):
    if args.format not in allowed:
        raise UsageError(f"--format {args.format} not supported here (choose from {', '.join(allowed)})")


def cmd_estimate(args) -> int:
    _check_format(args, ("csv", "json"))
    rep = estimate_prob_stable(args.n0, args.n1, args.dist, args.samples, args.seed, mode=args.mode,
                               threads=args.threads, eps=args.tolerance)
    text = reports_csv([rep]) if args.format == "csv" else reports_json([rep])
    _emit(text, args.out)
    theory = "" if rep.theory is None else f" theory={rep.theory:.10g}"
    msg = (f"n0={rep.n0} n1={rep.n1} p_hat={rep.p_hat:.6g} "
           f"ci=[{rep.ci_low:.6g}, {rep.ci_high:.6g}]{theory} discards={rep.marginal_discards}")
    print(msg, file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_deltas(args) -> int:
    _check_format(args, ("csv", "json"))
    rep = check_c0_relation(args.n0, args.dist, args.samples, args.seed, threads=args.threads,
                            eps=args.tolerance)
    d = rep.deltas
    total, sigma = d.total()
    if args.format == "json":
        rec = d.to_record()
        rec["relations"] = [{"label": c.label, "left": c.left, "right": c.right, "sigma": c.sigma,
                             "agrees": c.agrees} for c in [rep.c0] + rep.case3]
        text = to_json(rec)
    else:
        rows = [(e.index, "".join("+" if s > 0 else "-" for s in e.code), e.samples, e.hits,
                 e.delta_hat, total) for e in d.entries]
        text = table_csv(("index", "code", "conditional_samples", "conditional_hits", "delta_hat",
                          "total"), rows)
    _emit(text, args.out)
    summary = [f"total={total:.6g} sigma={sigma:.3g} expected={1 / 2 ** (args.n0 + 1):.6g}"]
    summary += [f"{c.label}: {c.left:.6g} vs {c.right:.6g} ({'ok' if c.agrees else 'DISAGREE'})"
                for c in [rep.c0] + rep.case3]
    print("\n".join(summary), file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_sweep(args) -> int:
    _check_format(args, ("csv", "json", "svg"))
    lo = args.n1_min if args.n1_min is not None else args.n0 + 1
    hi = args.n1_max if args.n1_max is not None else args.n0 + 10
    if hi < lo:
        raise UsageError("--n1-max must be at least --n1-min")
    reports = conjecture_sweep(args.n0, range(lo, hi + 1), args.dist, args.samples, args.seed,
                               mode=args.mode, threads=args.threads)
    if args.format == "svg":
        text = sweep_svg(reports)
    elif args.format == "json":
        text = reports_json(reports)
    else:
        text = reports_csv(reports)
    _emit(text, args.out)
    ref = float(reference_level(args.n0))
    print(f"{len(reports)} cells, reference level {ref:.6g}",
          file=sys.stderr if args.out is None else sys.stdout)
    return EXIT_OK


def cmd_facets(args) -> int:
    _check_format(args, ("csv", "json"))
    hi = args.m_max if args.m_max is not None else args.m_min
    if args.m_min <= args.n0 or hi < args.m_min:
        raise UsageError("need n0 < m-min <= m-max")
    rows = facet_report(args.n0, range(args.m_min, hi + 1), trials=args.trials, seed=args.seed)
    header = ("m", "n0", "regions", "bounded", "total_facets", "avg_facets", "avg_float",
              "empirical_total", "axis_hits", "maxneg_facets")
    data = [(r.m, r.n0, r.regions, r.bounded, r.total_facets, str(r.average), float(r.average),
             r.empirical_total, r.axis_hits, r.maxneg_facets) for r in rows]
    if args.format == "json":
        text = to_json([dict(zip(header, row)) for row in data])
    else:
        text = table_csv(header, data)
    _emit(text, args.out)
    return EXIT_OK


# --- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: $DEADNEURON_SEED or 0)")
    common.add_argument("--tolerance", type=float, default=lc.EPS,
                        help="numerical tolerance for verdicts (default %(default)g)")
    common.add_argument("--threads", type=_positive, default=1,
                        help="worker threads; never changes results")

    outputs = argparse.ArgumentParser(add_help=False)
    outputs.add_argument("--out", default=None, help="output file (default: stdout)")
    outputs.add_argument("--format", default="csv", choices=("csv", "json", "svg"))

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--n0", type=_positive, required=True)
    sampling.add_argument("--samples", type=_positive, default=200_000)
    sampling.add_argument("--dist", type=_distribution, default=Distribution("uniform", 1.0),
                          help="uniform[:halfwidth], normal[:stddev] or he[:fan_in]")

    p = argparse.ArgumentParser(prog="deadneuron", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("counts", parents=[common], help="region, bounded-region and facet counts")
    s.add_argument("--m", type=_positive, required=True, help="number of hyperplanes")
    s.add_argument("--n", type=_positive, required=True, help="ambient dimension")
    s.set_defaults(func=cmd_counts)

    s = sub.add_parser("decide", parents=[common], help="exact verdict for one second-layer neuron")
    s.add_argument("params", help="network parameter JSON file")
    s.add_argument("--neuron", type=int, default=0, help="zero-based neuron index in layer 2")
    s.add_argument("--exact", action="store_true", help="rational arithmetic")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("estimate", parents=[common, outputs, sampling], help="Monte Carlo estimate")
    s.add_argument("--n1", type=_positive, required=True)
    s.add_argument("--mode", choices=("exact", "lp", "detector"), default="exact")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("deltas", parents=[common, outputs, sampling],
                       help="per-configuration decomposition for n1 = n0 + 1")
    s.set_defaults(func=cmd_deltas, samples=400_000)

    s = sub.add_parser("sweep", parents=[common, outputs, sampling], help="estimates over a range of n1")
    s.add_argument("--n1-min", type=_positive, default=None)
    s.add_argument("--n1-max", type=_positive, default=None)
    s.add_argument("--mode", choices=("exact", "lp", "detector"), default="exact")
    s.set_defaults(func=cmd_sweep, samples=50_000)

    s = sub.add_parser("facets", parents=[common, outputs], help="facet statistics")
    s.add_argument("--n0", type=_positive, required=True)
    s.add_argument("--m-min", type=_positive, required=True)
    s.add_argument("--m-max", type=_positive, default=None)
    s.add_argument("--trials", type=_positive, default=5)
    s.set_defaults(func=cmd_facets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        print(f"deadneuron: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NotGeneric, DegenerateRow) as exc:
        print(f"deadneuron: non-generic first layer: {exc}", file=sys.stderr)
        return EXIT_NOT_GENERIC
    except (CountOverflow, DimensionMismatch) as exc:
        print(f"deadneuron: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"deadneuron: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

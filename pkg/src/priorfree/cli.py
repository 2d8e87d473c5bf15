"""Command-line surface: benchmark, run, bayes, and compare subcommands.

Exit codes: 0 on success, 2 on configuration errors, 3 when some trials of a
batch failed (the report still carries the failed rows).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .auctions import OPSParams
from .benchmarks import fixed_price_benchmark, k_unit_benchmark_brute_force, \
    k_unit_monotone_benchmark, monotone_benchmark, monotone_benchmark_brute_force
from .core import AuctionError, BadConfig, read_profile
from .experiments import (
    ExperimentConfig,
    GeneratorSpec,
    compare_bayes,
    load_environment,
    parse_generator_spec,
    run_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {str(k): _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, frozenset):
        return sorted(x)
    return x


def _cmd_benchmark(args) -> int:
    profile = read_profile(args.input)
    if args.kind == "f2":
        result = fixed_price_benchmark(profile)
    elif args.kind == "m2":
        result = (monotone_benchmark_brute_force if args.oracle else monotone_benchmark)(profile)
    else:
        if args.k is None:
            raise BadConfig("--kind m2k requires --k")
        solver = k_unit_benchmark_brute_force if args.oracle else k_unit_monotone_benchmark
        result = solver(profile, args.k)
    if args.json:
        print(json.dumps({"value": result.value, "prices": list(result.prices),
                          "winners": sorted(result.winners)}))
    else:
        print(f"value {result.value}")
        print("prices " + " ".join(str(p) for p in result.prices))
        print("winners " + " ".join(str(i) for i in sorted(result.winners)))
    return EXIT_OK


def _cmd_run(args) -> int:
    if (args.input is None) == (args.generator is None):
        raise BadConfig("pass exactly one of --input or --generator")
    if args.input is not None:
        generator = GeneratorSpec(kind="file", path=args.input)
    else:
        generator = parse_generator_spec(args.generator)
    config = ExperimentConfig(
        generator=generator,
        auction=args.auction,
        trials=args.trials,
        seed=args.seed,
        k=args.k,
        params=OPSParams(w=args.w, fallback_probability=args.fallback_prob),
    )
    report = run_experiment(config)
    if args.out:
        report.write(args.out)
    if args.json:
        print(json.dumps(_json_safe(report.to_json()), sort_keys=True))
    else:
        sys.stdout.write(report.to_csv())
    return EXIT_PARTIAL if report.failures else EXIT_OK


def _compare_report(args):
    dists = load_environment(args.env)
    return compare_bayes(dists, k=args.k, trials=args.trials, seed=args.seed,
                         grid_size=args.grid_size)


def _cmd_bayes(args) -> int:
    report = _compare_report(args)
    if args.out:
        report.write(args.out)
    summary = dict(report.aggregates)
    if summary["pointwise_ordered"] is False:
        print("warning: priors are not pointwise ordered; the ratio is still reported",
              file=sys.stderr)
    print(json.dumps(_json_safe(summary), sort_keys=True))
    return EXIT_OK


def _cmd_compare(args) -> int:
    report = _compare_report(args)
    if args.out:
        report.write(args.out)
    if args.json:
        print(json.dumps(_json_safe(report.to_json()), sort_keys=True))
    else:
        sys.stdout.write(report.to_csv())
        print(json.dumps(_json_safe(report.aggregates), sort_keys=True), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="priorfree",
        description="Prior-free auctions for ordered bidders: benchmarks, "
                    "auction runs, and Bayesian comparisons.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="replayable 64-bit seed")
        p.add_argument("--out", help="directory for report.csv and report.json")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="emit JSON to stdout")
        fmt.add_argument("--csv", action="store_true", help="emit CSV to stdout (default)")

    b = sub.add_parser("benchmark", help="evaluate a revenue benchmark on a profile file")
    b.add_argument("--input", required=True, help="profile file, one value per line")
    b.add_argument("--kind", required=True, choices=("f2", "m2", "m2k"),
                   help="f2: single price; m2: monotone prices; m2k: monotone, k units")
    b.add_argument("--k", type=int, help="unit supply for --kind m2k")
    b.add_argument("--oracle", action="store_true", help="force the brute-force solver")
    common(b)

    r = sub.add_parser("run", help="Monte Carlo auction runs against the matching benchmark")
    r.add_argument("--input", help="profile file, one value per line")
    r.add_argument("--generator", help="instance family, e.g. harmonic:1000 or iid-uniform:50,1")
    r.add_argument("--auction", required=True, choices=("ops", "rsop", "bbr-ops", "bbr-rsop"))
    r.add_argument("--w", type=float, default=25.0, help="price ladder ratio")
    r.add_argument("--fallback-prob", type=float, default=0.5,
                   help="probability of the single-price fallback branch")
    r.add_argument("--k", type=int, help="unit supply (bbr auctions only)")
    r.add_argument("--trials", type=int, default=1)
    common(r)

    for name, help_text in (("bayes", "prior-aware vs prior-free revenue summary"),
                            ("compare", "full per-trial comparison report")):
        c = sub.add_parser(name, help=help_text)
        c.add_argument("--env", required=True,
                       help="JSON file: list of priors, e.g. [{\"family\": \"uniform\", \"h\": 3}]")
        c.add_argument("--k", type=int, required=True, help="unit supply")
        c.add_argument("--trials", type=int, default=1000)
        c.add_argument("--grid-size", type=int, default=4096, help="ironing quantile grid size")
        common(c)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"benchmark": _cmd_benchmark, "run": _cmd_run,
                "bayes": _cmd_bayes, "compare": _cmd_compare}
    try:
        return handlers[args.command](args)
    except (AuctionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

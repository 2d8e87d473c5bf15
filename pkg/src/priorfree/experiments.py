"""Experiment harness: instance generators, Monte Carlo drivers, reports.

Every trial derives its own substreams from (seed, trial), so reports are
byte-identical on replay and trials are independent. Failed trials become
rows with an error message instead of aborting the batch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .auctions import OPSParams, make_auction
from .bayes import (
    BidderDistribution,
    Exponential,
    MyersonAuction,
    PiecewiseLinearCdf,
    TruncatedGaussian,
    Uniform,
    pointwise_ordered_check,
)
from .benchmarks import k_unit_monotone_benchmark, monotone_benchmark
from .core import AuctionError, BadConfig, BadEnv, CoinStream, Profile, read_profile, second_highest
from .multiunit import bbr_auction

AUCTIONS = ("ops", "rsop", "bbr-ops", "bbr-rsop")
GENERATORS = ("file", "harmonic", "iid-uniform", "ordered-uniform", "lognormal")


@dataclass(frozen=True)
class GeneratorSpec:
    """One instance family: a profile file or a parametric random generator."""

    kind: str
    path: str | None = None
    n: int | None = None
    high: float = 1.0
    highs: tuple[float, ...] | None = None
    mu: float = 0.0
    sigma: float = 1.0
    sort_descending: bool = True

    def __post_init__(self):
        if self.kind not in GENERATORS:
            raise BadConfig(f"unknown generator {self.kind!r}; choose from {GENERATORS}")
        if self.kind == "file" and not self.path:
            raise BadConfig("file generator needs a path")
        if self.kind in ("harmonic", "iid-uniform", "lognormal") and not (self.n and self.n >= 1):
            raise BadConfig(f"{self.kind} generator needs n >= 1")
        if self.kind == "ordered-uniform" and not self.highs:
            raise BadConfig("ordered-uniform generator needs the per-bidder upper endpoints")

    def describe(self) -> str:
        if self.kind == "file":
            return f"file:{self.path}"
        if self.kind == "harmonic":
            return f"harmonic:{self.n}"
        if self.kind == "iid-uniform":
            return f"iid-uniform:n={self.n},h={self.high}"
        if self.kind == "ordered-uniform":
            return "ordered-uniform:" + ",".join(str(h) for h in self.highs)
        return f"lognormal:n={self.n},mu={self.mu},sigma={self.sigma},desc={self.sort_descending}"


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse CLI shorthand like ``harmonic:1000``, ``iid-uniform:50,2.0``,
    ``ordered-uniform:3,2,1``, ``lognormal:50,0,0.5``, or ``file:prof.txt``."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "file":
            return GeneratorSpec(kind="file", path=rest)
        if kind == "harmonic":
            return GeneratorSpec(kind="harmonic", n=int(rest))
        if kind == "iid-uniform":
            n_text, _, h_text = rest.partition(",")
            return GeneratorSpec(kind="iid-uniform", n=int(n_text), high=float(h_text or 1.0))
        if kind == "ordered-uniform":
            highs = tuple(float(h) for h in rest.split(",") if h)
            return GeneratorSpec(kind="ordered-uniform", highs=highs)
        if kind == "lognormal":
            parts = [p for p in rest.split(",") if p]
            n = int(parts[0])
            mu = float(parts[1]) if len(parts) > 1 else 0.0
            sigma = float(parts[2]) if len(parts) > 2 else 1.0
            return GeneratorSpec(kind="lognormal", n=n, mu=mu, sigma=sigma)
    except ValueError as exc:
        raise BadConfig(f"bad generator spec {text!r}: {exc}") from None
    raise BadConfig(f"unknown generator {kind!r}; choose from {GENERATORS}")


def generate_instance(spec: GeneratorSpec, rng: np.random.Generator) -> Profile:
    """Draw one valuation profile; deterministic given the generator and rng state."""
    if spec.kind == "file":
        return read_profile(spec.path)
    if spec.kind == "harmonic":
        return tuple(1.0 / i for i in range(1, spec.n + 1))
    if spec.kind == "iid-uniform":
        return tuple(float(x) for x in spec.high * rng.random(spec.n))
    if spec.kind == "ordered-uniform":
        return tuple(float(h * u) for h, u in zip(spec.highs, rng.random(len(spec.highs))))
    draws = rng.lognormal(spec.mu, spec.sigma, spec.n)
    if spec.sort_descending:
        draws = np.sort(draws)[::-1]
    return tuple(float(x) for x in draws)


@dataclass(frozen=True)
class ExperimentConfig:
    generator: GeneratorSpec
    auction: str
    trials: int
    seed: int
    k: int | None = None
    params: OPSParams = field(default_factory=OPSParams)
    threshold_tolerance: float = 1e-9

    def __post_init__(self):
        if self.auction not in AUCTIONS:
            raise BadConfig(f"unknown auction {self.auction!r}; choose from {AUCTIONS}")
        if self.trials < 1:
            raise BadConfig("need at least one trial")
        if self.auction.startswith("bbr"):
            if self.k is None or self.k < 1:
                raise BadConfig("k >= 1 is required for the supply-limited auctions")
        elif self.k is not None:
            raise BadConfig("k only applies to the supply-limited auctions")


@dataclass(frozen=True)
class TrialRow:
    trial: int
    branch: str
    revenue: float | None
    benchmark: float | None
    ratio: float | None
    k: int | None = None
    selection_size: int | None = None
    thresholds: dict[int, float] | None = None
    error: str | None = None


CSV_HEADER = "trial,branch,revenue,benchmark,ratio,k,selection_size,error"


def _csv_cell(x) -> str:
    return "" if x is None else str(x)


@dataclass(frozen=True)
class ExperimentReport:
    """Per-trial rows plus aggregates and the environment echo."""

    rows: list[TrialRow]
    aggregates: dict
    config: dict
    version: str = __version__

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r.error is not None)

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(",".join(_csv_cell(x) for x in (
                r.trial, r.branch, r.revenue, r.benchmark, r.ratio, r.k, r.selection_size,
                r.error)))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        rows = []
        for r in self.rows:
            row = {"trial": r.trial, "branch": r.branch, "revenue": r.revenue,
                   "benchmark": r.benchmark, "ratio": r.ratio}
            if r.k is not None:
                row["k"] = r.k
                row["selection_size"] = r.selection_size
                row["thresholds"] = r.thresholds
            if r.error is not None:
                row["error"] = r.error
            rows.append(row)
        return {"config": self.config, "version": self.version,
                "aggregates": self.aggregates, "rows": rows}

    def write(self, outdir) -> None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(self.to_csv(), encoding="utf-8")
        (out / "report.json").write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _aggregate(rows: list[TrialRow]) -> dict:
    ratios = [r.ratio for r in rows if r.error is None and r.ratio is not None]
    revenues = [r.revenue for r in rows if r.error is None]
    agg = {
        "trials": len(rows),
        "failures": sum(1 for r in rows if r.error is not None),
        "mean_revenue": sum(revenues) / len(revenues) if revenues else None,
        "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        "min_ratio": min(ratios) if ratios else None,
        "stderr_ratio": None,
    }
    if len(ratios) >= 2:
        mean = agg["mean_ratio"]
        var = sum((x - mean) ** 2 for x in ratios) / (len(ratios) - 1)
        agg["stderr_ratio"] = math.sqrt(var / len(ratios))
    return agg


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Per trial: generate an instance, compute the benchmark, run the auction.

    Digital-goods auctions are measured against the monotone benchmark; the
    supply-limited reduction against the k-unit one.
    """
    limited = config.auction.startswith("bbr")
    inner_name = config.auction.split("-", 1)[1] if limited else config.auction
    inner = make_auction(inner_name, config.params)
    base = CoinStream(config.seed)
    benchmark_cache: dict[Profile, float] = {}
    rows: list[TrialRow] = []
    for trial in range(config.trials):
        try:
            profile = generate_instance(config.generator, base.child(trial, 0).rng())
            coins = base.child(trial, 1)
            if profile not in benchmark_cache:
                if limited:
                    benchmark_cache[profile] = k_unit_monotone_benchmark(profile, config.k).value
                else:
                    benchmark_cache[profile] = monotone_benchmark(profile).value
            bench = benchmark_cache[profile]
            if limited:
                outcome = bbr_auction(profile, config.k, inner, coins,
                                      tolerance=config.threshold_tolerance)
                selection_size = len(outcome.metadata["selection"])
                thresholds = dict(outcome.metadata["thresholds"])
            else:
                outcome = inner(profile, coins)
                selection_size, thresholds = None, None
            ratio = outcome.revenue / bench if bench > 0.0 else 0.0
            rows.append(TrialRow(trial=trial, branch=outcome.metadata.get("branch") or config.auction,
                                 revenue=outcome.revenue, benchmark=bench, ratio=ratio,
                                 k=config.k, selection_size=selection_size, thresholds=thresholds))
        except (AuctionError, OSError) as exc:
            rows.append(TrialRow(trial=trial, branch=config.auction, revenue=None, benchmark=None,
                                 ratio=None, k=config.k, error=str(exc)))
    config_echo = {
        "generator": config.generator.describe(),
        "auction": config.auction,
        "k": config.k,
        "trials": config.trials,
        "seed": config.seed,
        "w": config.params.w,
        "fallback_probability": config.params.fallback_probability,
    }
    return ExperimentReport(rows=rows, aggregates=_aggregate(rows), config=config_echo)


_FAMILIES = {
    "uniform": lambda p: Uniform(p["h"]),
    "exponential": lambda p: Exponential(p["rate"]),
    "truncated-gaussian": lambda p: TruncatedGaussian(p["mean"], p["sd"], *p["support"]),
    "piecewise-linear-cdf": lambda p: PiecewiseLinearCdf([tuple(k) for k in p["knots"]]),
}


def environment_from_obj(obj) -> list[BidderDistribution]:
    """Priors from the JSON env schema: a list of {"family": ..., <params>}."""
    if not isinstance(obj, list) or len(obj) < 2:
        raise BadEnv("environment must be a list of at least 2 prior descriptions")
    dists = []
    for entry in obj:
        if not isinstance(entry, dict) or "family" not in entry:
            raise BadEnv(f"bad prior description: {entry!r}")
        family = entry["family"]
        if family not in _FAMILIES:
            raise BadEnv(f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
        try:
            dists.append(_FAMILIES[family]({k: v for k, v in entry.items() if k != "family"}))
        except (KeyError, TypeError) as exc:
            raise BadEnv(f"bad parameters for family {family!r}: {exc}") from None
    return dists


def load_environment(path) -> list[BidderDistribution]:
    try:
        with open(path, encoding="utf-8") as handle:
            obj = json.load(handle)
    except json.JSONDecodeError as exc:
        raise BadEnv(f"{path}: not valid JSON: {exc}") from None
    return environment_from_obj(obj)


BAYES_CSV_HEADER = "trial,optimal_revenue,auction_revenue"


@dataclass(frozen=True)
class BayesComparison:
    """Head-to-head of the prior-aware optimum and the prior-free reduction."""

    rows: list[tuple[int, float, float]]
    aggregates: dict
    config: dict
    version: str = __version__

    def to_csv(self) -> str:
        lines = [BAYES_CSV_HEADER]
        lines += [f"{t},{a},{b}" for t, a, b in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"config": self.config, "version": self.version, "aggregates": self.aggregates,
                "rows": [{"trial": t, "optimal_revenue": a, "auction_revenue": b}
                         for t, a, b in self.rows]}

    def write(self, outdir) -> None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(self.to_csv(), encoding="utf-8")
        (out / "report.json").write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def compare_bayes(dists: Sequence[BidderDistribution], k: int, trials: int, seed: int,
                  params: OPSParams | None = None, grid_size: int = 4096) -> BayesComparison:
    """Draw profiles from the priors; run the optimal auction and the reduction
    (price-scaling inner auction) on each; report the ratio of mean revenues
    plus the pointwise-ordered and well-behaved diagnostics."""
    params = params or OPSParams()
    optimal = MyersonAuction(dists, k, grid_size)
    inner = make_auction("ops", params)
    base = CoinStream(seed)
    rows: list[tuple[int, float, float]] = []
    above = 0.0
    for trial in range(trials):
        rng = base.child(trial, 0).rng()
        profile = tuple(float(d.sample(rng)) for d in dists)
        opt_out = optimal.run(profile, base.child(trial, 1).rng())
        bbr_out = bbr_auction(profile, k, inner, base.child(trial, 2))
        rows.append((trial, opt_out.revenue, bbr_out.revenue))
        if opt_out.payments:
            v2 = second_highest(profile)
            above += sum(p for p in opt_out.payments.values() if p > v2)
    mean_opt = sum(r[1] for r in rows) / trials
    mean_auc = sum(r[2] for r in rows) / trials
    tops = [float(c.ironed_virtual(c.dist.support[1])) if math.isfinite(c.dist.support[1])
            else float(c.ironed_virtual(c.dist.ppf(1.0 - 1e-9))) for c in optimal.curves]
    z_grid = np.linspace(0.0, max(tops), 65)
    aggregates = {
        "trials": trials,
        "mean_optimal_revenue": mean_opt,
        "mean_auction_revenue": mean_auc,
        "ratio_of_means": mean_auc / mean_opt if mean_opt > 0.0 else None,
        "pointwise_ordered": pointwise_ordered_check(dists, z_grid, grid_size),
        "well_behaved_fraction": above / (mean_opt * trials) if mean_opt > 0.0 else 0.0,
        "grid_size": grid_size,
    }
    config = {"k": k, "trials": trials, "seed": seed,
              "families": [type(d).__name__ for d in dists]}
    return BayesComparison(rows=rows, aggregates=aggregates, config=config)

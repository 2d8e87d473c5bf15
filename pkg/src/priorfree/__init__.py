"""Prior-free auctions for ordered bidders.

Revenue benchmarks over nonincreasing posted-price vectors, truthful
unlimited-supply auctions, a reduction to limited supply, and a Bayesian
comparison suite (virtual values, ironing, the revenue-optimal auction),
plus a seeded Monte Carlo experiment harness.
"""

__version__ = "0.1.0"

from .core import (
    AuctionError,
    AuctionOutcome,
    BadConfig,
    BadEnv,
    BadGrid,
    BadSupply,
    CoinStream,
    IndexOutOfRange,
    LengthMismatch,
    NonMonotoneAllocation,
    OutOfSupport,
    ProfileTooLarge,
    ProfileTooSmall,
    mask_to_subset,
    read_profile,
    revenue_at_prices,
    second_highest,
)
from .benchmarks import (
    BenchmarkResult,
    PriceLevelGrid,
    fixed_price_benchmark,
    k_unit_benchmark_brute_force,
    k_unit_monotone_benchmark,
    leveled_monotone_optimum,
    monotone_benchmark,
    monotone_benchmark_brute_force,
    projection_monotonicity_check,
)
from .auctions import OPSParams, make_auction, ops_auction, rsop, truthfulness_probe
from .multiunit import (
    WinnerSelection,
    bbr_auction,
    select_winners,
    selection_retains_half_benchmark,
    threshold_bid,
)
from .bayes import (
    BidderDistribution,
    Exponential,
    IronedCurve,
    MyersonAuction,
    PiecewiseLinearCdf,
    TruncatedGaussian,
    Uniform,
    iron_distribution,
    myerson_k_unit,
    pointwise_ordered_check,
    virtual_value,
    well_behaved_estimate,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    GeneratorSpec,
    compare_bayes,
    generate_instance,
    load_environment,
    run_experiment,
)

"""Truthful unlimited-supply auctions for ordered bidders.

Both auctions are take-it-or-leave-it mechanisms: the price each bidder faces
is computed from the other bidders' reports only, so truthful bidding is a
dominant strategy. ``rsop`` prices each random half with the other half's
optimal single price; ``ops_auction`` learns an optimal monotone price vector
on a geometric ladder from a random training half and posts it to the rest,
falling back to ``rsop`` with configurable probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    AuctionOutcome,
    CoinStream,
    IndexOutOfRange,
    as_generator,
    collects,
    mask_to_subset,
    second_highest,
)
from .benchmarks import PriceLevelGrid, leveled_monotone_optimum, monotone_benchmark

# Any truthful digital-goods auction: (profile, coins) -> AuctionOutcome, where
# the offer a bidder faces must not depend on its own report.
DigitalGoodsAuction = Callable[[Sequence[float], object], AuctionOutcome]

NO_OFFER = math.inf


@dataclass(frozen=True)
class OPSParams:
    """Knobs for the price-scaling auction.

    ``w`` is the ladder ratio between consecutive price levels and
    ``fallback_probability`` the chance of running the single-price fallback
    instead of the monotone branch. ``sell_to_training`` additionally posts
    test-side prices to the training side (off by default: the baseline sells
    one way only); ``scale_training_optimum`` replaces the ladder with the
    training side's exact monotone optimum divided by ``w``.
    """

    w: float = 25.0
    fallback_probability: float = 0.5
    sell_to_training: bool = False
    scale_training_optimum: bool = False

    def __post_init__(self):
        if not self.w > 1.0:
            raise ValueError("level ratio w must exceed 1")
        if not 0.0 <= self.fallback_probability <= 1.0:
            raise ValueError("fallback probability must lie in [0, 1]")


def _optimal_single_price(side_values: list[float]) -> float | None:
    """Best fixed price for one side using only that side's bids; None when the
    side has no positive bid (an empty side makes no offers)."""
    best_rev, best_price = 0.0, None
    for p in sorted({v for v in side_values if v > 0.0}):
        rev = p * sum(1 for v in side_values if v >= p)
        if best_price is None or rev > best_rev or (rev == best_rev and p > best_price):
            best_rev, best_price = rev, p
    return best_price


def rsop(profile: Sequence[float], coins, partition: Iterable[int] | None = None) -> AuctionOutcome:
    """Random sampling optimal price auction.

    Splits bidders into two halves by fair coins (or the forced ``partition``,
    given as the id set of the first half), prices each half with the other
    half's optimal single price, and sells to everyone who accepts.
    """
    rng = as_generator(coins)
    n = len(profile)
    if partition is None:
        flips = rng.integers(0, 2, size=n)
        side_a = frozenset(i + 1 for i in range(n) if flips[i] == 1)
    else:
        side_a = frozenset(partition)
        for i in side_a:
            if not 1 <= i <= n:
                raise IndexOutOfRange(f"bidder id {i} outside 1..{n}")
    price_a = _optimal_single_price([profile[i - 1] for i in sorted(side_a)])
    price_b = _optimal_single_price([profile[i - 1] for i in range(1, n + 1) if i not in side_a])

    def offer_to(i: int) -> float:
        price = price_b if (i + 1) in side_a else price_a
        return price if price is not None else NO_OFFER

    offers = tuple(offer_to(i) for i in range(n))
    sales = {i + 1: offers[i] for i in range(n)
             if math.isfinite(offers[i]) and collects(profile[i], offers[i])}
    meta = {
        "partition": side_a,
        "price_first_half": price_a,
        "price_second_half": price_b,
        "offers": offers,
    }
    return AuctionOutcome.from_sales(profile, sales, meta)


def ops_auction(profile: Sequence[float], coins, params: OPSParams = OPSParams(),
                training: Iterable[int] | None = None) -> AuctionOutcome:
    """Optimal price scaling auction.

    With the fallback probability this runs :func:`rsop` on the whole profile.
    Otherwise it drops every bidder outside a uniformly random training set to
    zero, solves for the optimal monotone price vector on the ladder anchored
    at the training side's second-highest bid, and posts those prices to the
    test side only. ``training`` forces the training set (for coupled tests).
    """
    rng = as_generator(coins)
    n = len(profile)
    if rng.random() < params.fallback_probability:
        inner = rsop(profile, rng)
        meta = dict(inner.metadata)
        meta["branch"] = "fallback"
        return AuctionOutcome.from_sales(profile, inner.payments, meta)

    if training is None:
        flips = rng.integers(0, 2, size=n)
        train = frozenset(i + 1 for i in range(n) if flips[i] == 1)
    else:
        train = frozenset(training)
    masked = mask_to_subset(profile, train)
    top = second_highest(masked) if n >= 2 else 0.0

    if top <= 0.0:
        prices: tuple[float, ...] = (0.0,) * n
    elif params.scale_training_optimum:
        prices = tuple(p / params.w for p in monotone_benchmark(masked).prices)
    else:
        grid = PriceLevelGrid.for_training(masked, params.w)
        prices = leveled_monotone_optimum(masked, grid).prices

    offers = tuple(prices[i] if (i + 1) not in train and prices[i] > 0.0 else NO_OFFER
                   for i in range(n))
    sales = {i + 1: prices[i] for i in range(n)
             if (i + 1) not in train and collects(profile[i], prices[i])}

    if params.sell_to_training:
        masked_test = mask_to_subset(profile, set(range(1, n + 1)) - train)
        top_test = second_highest(masked_test) if n >= 2 else 0.0
        if top_test > 0.0:
            grid_test = PriceLevelGrid.for_training(masked_test, params.w)
            back_prices = leveled_monotone_optimum(masked_test, grid_test).prices
            offers = tuple(
                back_prices[i] if (i + 1) in train and back_prices[i] > 0.0 else offers[i]
                for i in range(n))
            for i in range(n):
                if (i + 1) in train and collects(profile[i], back_prices[i]):
                    sales[i + 1] = back_prices[i]

    meta = {
        "branch": "monotone",
        "training": train,
        "ladder_top": top,
        "prices": prices,
        "offers": offers,
    }
    return AuctionOutcome.from_sales(profile, sales, meta)


def make_auction(name: str, params: OPSParams = OPSParams()) -> DigitalGoodsAuction:
    """Runner factory for the unlimited-supply auctions by name."""
    if name == "rsop":
        return rsop
    if name == "ops":
        return lambda profile, coins: ops_auction(profile, coins, params)
    raise ValueError(f"unknown digital-goods auction {name!r}")


def truthfulness_probe(auction: DigitalGoodsAuction, profile: Sequence[float], bidder: int,
                       deviations: Iterable[float], coins: CoinStream) -> bool:
    """True iff no probed misreport beats truthful bidding under identical coins.

    Utility is measured against the bidder's true value while its report
    sweeps ``deviations``; the CoinStream is replayed so the comparison is
    coupled draw for draw.
    """
    n = len(profile)
    if not 1 <= bidder <= n:
        raise IndexOutOfRange(f"bidder id {bidder} outside 1..{n}")
    if not isinstance(coins, CoinStream):
        raise TypeError("coupled probes need a replayable CoinStream")
    true_value = profile[bidder - 1]

    def utility(report: float) -> float:
        reported = tuple(profile[:bidder - 1]) + (float(report),) + tuple(profile[bidder:])
        outcome = auction(reported, coins)
        payment = outcome.payments.get(bidder)
        return true_value - payment if payment is not None else 0.0

    truthful = utility(true_value)
    return all(utility(b) <= truthful for b in deviations)

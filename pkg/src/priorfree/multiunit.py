"""Reduction from k-unit supply to unlimited supply.

Select the winner set of the k-unit monotone benchmark, run any truthful
digital-goods auction on that set with the induced ordering, and charge each
winner the larger of its selection threshold and the inner payment. The
selection thresholds come from bisection against the (monotone) membership
predicate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    AuctionOutcome,
    BadSupply,
    IndexOutOfRange,
    NonMonotoneAllocation,
    ProfileTooSmall,
)
from .auctions import DigitalGoodsAuction
from .benchmarks import k_unit_monotone_benchmark, monotone_benchmark


@dataclass(frozen=True)
class WinnerSelection:
    """Benchmark argmax prices and the tie-broken winner set (at most k ids)."""

    prices: tuple[float, ...]
    winners: frozenset[int]
    value: float


def select_winners(profile: Sequence[float], k: int) -> WinnerSelection:
    """Winner set of the k-unit monotone benchmark under its deterministic tie rules.

    Strict winners (bid above price) always enter; bidders priced exactly at
    their bid are admitted highest price first, then lowest id, until k units
    are committed.
    """
    result = k_unit_monotone_benchmark(tuple(profile), k)
    return WinnerSelection(result.prices, result.winners, result.value)


def bisect_threshold(member: Callable[[float], bool], hi: float, tolerance: float,
                     lo: float = 0.0, check_grid: Iterable[float] | None = None) -> float:
    """Smallest bid (within ``tolerance``) at which ``member`` flips to True.

    Assumes membership is nondecreasing in the bid. Returns the midpoint of
    the final bracket, ``lo`` if already a member there, and +inf when even
    ``hi`` is excluded. With ``check_grid``, membership is evaluated on the
    grid first and an in/out/in flip raises NonMonotoneAllocation.
    """
    if check_grid is not None:
        probes = [(b, member(b)) for b in sorted(check_grid)]
        seen_in = False
        for b, flag in probes:
            if flag:
                seen_in = True
            elif seen_in:
                raise NonMonotoneAllocation(f"membership flips back off at bid {b}")
    if member(lo):
        return lo
    if not member(hi):
        return math.inf
    while hi - lo > tolerance:
        mid = (lo + hi) / 2.0
        if member(mid):
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2.0


def threshold_bid(profile: Sequence[float], bidder: int, k: int, tolerance: float = 1e-9,
                  check_grid: Iterable[float] | None = None) -> float:
    """Bid above which ``bidder`` enters the selected winner set, others fixed.

    Bisection over [0, twice the highest bid]; +inf when no probed bid wins.
    """
    values = tuple(profile)
    n = len(values)
    if not 1 <= bidder <= n:
        raise IndexOutOfRange(f"bidder id {bidder} outside 1..{n}")

    def member(bid: float) -> bool:
        probed = values[:bidder - 1] + (float(bid),) + values[bidder:]
        return bidder in select_winners(probed, k).winners

    hi = 2.0 * max(values) if values else 0.0
    return bisect_threshold(member, hi=hi, tolerance=tolerance, check_grid=check_grid)


def bbr_auction(profile: Sequence[float], k: int, inner: DigitalGoodsAuction, coins,
                tolerance: float = 1e-9) -> AuctionOutcome:
    """Supply-respecting auction built from a truthful unlimited-supply one.

    Runs ``inner`` on the selected winners (contiguously reindexed, order
    preserved); its winners win here and pay the larger of the selection
    threshold and the inner payment. Thresholds are capped at the winner's own
    bid so bisection slack never breaks individual rationality.
    """
    values = tuple(profile)
    if len(values) < 2:
        raise ProfileTooSmall("the reduction needs at least 2 bidders")
    if k < 1:
        raise BadSupply(f"supply must be at least 1, got {k}")
    selection = select_winners(values, k)
    selected = sorted(selection.winners)
    sub_profile = tuple(values[i - 1] for i in selected)

    if not selected:
        meta = {"selection": selection.winners, "selection_prices": selection.prices,
                "thresholds": {}, "inner_payments": {}}
        return AuctionOutcome.from_sales(values, {}, meta)

    inner_outcome = inner(sub_profile, coins)
    thresholds: dict[int, float] = {}
    inner_payments: dict[int, float] = {}
    sales: dict[int, float] = {}
    for sub_id, payment in inner_outcome.payments.items():
        orig = selected[sub_id - 1]
        t = threshold_bid(values, orig, k, tolerance)
        t = min(t, values[orig - 1])
        thresholds[orig] = t
        inner_payments[orig] = payment
        sales[orig] = max(t, payment)

    meta = {
        "branch": inner_outcome.metadata.get("branch"),
        "selection": selection.winners,
        "selection_prices": selection.prices,
        "thresholds": thresholds,
        "inner_payments": inner_payments,
        "inner_metadata": inner_outcome.metadata,
    }
    return AuctionOutcome.from_sales(values, sales, meta)


@dataclass(frozen=True)
class HalfBenchmarkCheck:
    """Whether the selected winner set retains half the full k-unit benchmark.

    ``holds`` is None when fewer than two bidders are selected; that edge is
    reported rather than judged, since the unlimited-supply benchmark needs
    two bidders.
    """

    holds: bool | None
    selection_size: int
    selected_value: float
    full_value: float


def selection_retains_half_benchmark(profile: Sequence[float], k: int) -> HalfBenchmarkCheck:
    """Compare the monotone benchmark on the selected set against half the k-unit one."""
    values = tuple(profile)
    if len(values) < 2:
        raise ProfileTooSmall("the comparison needs at least 2 bidders")
    selection = select_winners(values, k)
    full = selection.value
    selected = sorted(selection.winners)
    if len(selected) < 2:
        return HalfBenchmarkCheck(None, len(selected), 0.0, full)
    sub = tuple(values[i - 1] for i in selected)
    sub_value = monotone_benchmark(sub).value
    return HalfBenchmarkCheck(sub_value >= full / 2.0, len(selected), sub_value, full)

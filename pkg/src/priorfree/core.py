"""Core value types, acceptance rules, and replayable randomness.

Bidders are identified by 1-based ids; the id order is the public bidder
ordering used everywhere else in the package. A valuation profile is a plain
tuple of nonnegative floats indexed by bidder id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Profile = tuple[float, ...]


class AuctionError(Exception):
    """Base class for every domain error raised by this package."""


class ProfileTooSmall(AuctionError):
    pass


class ProfileTooLarge(AuctionError):
    pass


class IndexOutOfRange(AuctionError):
    pass


class LengthMismatch(AuctionError):
    pass


class BadSupply(AuctionError):
    pass


class OutOfSupport(AuctionError):
    pass


class BadGrid(AuctionError):
    pass


class BadConfig(AuctionError):
    pass


class BadEnv(AuctionError):
    pass


class NonMonotoneAllocation(AuctionError):
    pass


def validate_profile(values: Iterable[float]) -> Profile:
    """Normalize to a tuple of floats, rejecting negatives and non-finite entries."""
    out = tuple(float(v) for v in values)
    for v in out:
        if not math.isfinite(v) or v < 0.0:
            raise ValueError(f"valuations must be finite and nonnegative, got {v!r}")
    return out


def read_profile(path) -> Profile:
    """Read a profile file: one nonnegative decimal per line, UTF-8, file order = bidder order.

    Blank lines are ignored.
    """
    values: list[float] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise BadConfig(f"{path}:{lineno}: not a decimal value: {text!r}") from None
            if not math.isfinite(v) or v < 0.0:
                raise BadConfig(f"{path}:{lineno}: valuations must be finite and nonnegative")
            values.append(v)
    return tuple(values)


def second_highest(values: Sequence[float]) -> float:
    """Second-largest valuation, counting multiplicity ([4, 4] -> 4)."""
    if len(values) < 2:
        raise ProfileTooSmall(f"second-highest needs at least 2 bidders, got {len(values)}")
    first = second = -math.inf
    for v in values:
        if v > first:
            first, second = v, first
        elif v > second:
            second = v
    return float(second)


def mask_to_subset(values: Sequence[float], subset: Iterable[int]) -> Profile:
    """Zero out every valuation whose bidder id is not in ``subset``.

    The result keeps the original length so later pricing stays index-aligned.
    """
    n = len(values)
    keep = set(subset)
    for i in keep:
        if not 1 <= i <= n:
            raise IndexOutOfRange(f"bidder id {i} outside 1..{n}")
    return tuple(float(v) if (i + 1) in keep else 0.0 for i, v in enumerate(values))


def collects(value: float, price: float) -> bool:
    """Unlimited-supply sale test: the posted price is collected iff value >= price > 0.

    A zero price collects nothing, and a zero-valued (masked) bidder never pays
    a positive price, so masking a bidder is equivalent to removing it.
    """
    return price > 0.0 and value >= price


def revenue_at_prices(values: Sequence[float], prices: Sequence[float]) -> float:
    """Total revenue from posting ``prices`` against ``values`` with unlimited supply."""
    if len(values) != len(prices):
        raise LengthMismatch(f"{len(values)} valuations vs {len(prices)} prices")
    return float(sum(p for v, p in zip(values, prices) if collects(v, p)))


@dataclass(frozen=True)
class CoinStream:
    """Replayable randomness: equal (seed, key) always reproduces the same draws.

    Distinct keys derived from the same seed give statistically independent
    streams, so per-trial and per-purpose substreams can run concurrently.
    """

    seed: int
    key: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        for k in self.key:
            if int(k) < 0:
                raise ValueError("stream keys must be nonnegative integers")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def child(self, *key: int) -> "CoinStream":
        return CoinStream(self.seed, self.key + tuple(int(k) for k in key))


def as_generator(coins) -> np.random.Generator:
    """Accept either a CoinStream (replayable) or a live numpy Generator."""
    if isinstance(coins, CoinStream):
        return coins.rng()
    if isinstance(coins, np.random.Generator):
        return coins
    raise TypeError(f"expected CoinStream or numpy Generator, got {type(coins).__name__}")


@dataclass(frozen=True)
class AuctionOutcome:
    """Realized auction result: winner ids, per-winner payments, total revenue."""

    winners: frozenset[int]
    payments: dict[int, float]
    revenue: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_sales(cls, values: Sequence[float], sales: Mapping[int, float],
                   metadata: dict | None = None) -> "AuctionOutcome":
        """Build an outcome from {bidder id: payment}, enforcing individual rationality."""
        n = len(values)
        for i, price in sales.items():
            if not 1 <= i <= n:
                raise IndexOutOfRange(f"winner id {i} outside 1..{n}")
            if price < 0.0:
                raise AuctionError(f"negative payment {price} for bidder {i}")
            if price > values[i - 1]:
                raise AuctionError(
                    f"individually irrational sale: bidder {i} pays {price} > bid {values[i - 1]}")
        payments = {i: float(p) for i, p in sorted(sales.items())}
        return cls(winners=frozenset(payments),
                   payments=payments,
                   revenue=float(sum(payments.values())),
                   metadata=dict(metadata or {}))

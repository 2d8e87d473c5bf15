"""Bayesian comparison suite: priors, virtual values, ironing, optimal auction.

Each bidder's prior exposes cdf/pdf/quantile plus the virtual value
v - (1 - F(v)) / f(v). For regular families the auction uses the exact
virtual value and its analytic inverse; irregular families are ironed on a
quantile grid: the revenue curve R(q) = q * F^{-1}(1 - q) is replaced by its
least concave majorant and the ironed virtual value is the hull slope, which
is constant across each ironed interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize, stats

from .core import (
    AuctionOutcome,
    BadEnv,
    BadGrid,
    BadSupply,
    LengthMismatch,
    OutOfSupport,
    ProfileTooSmall,
    as_generator,
    second_highest,
)

DEFAULT_GRID_SIZE = 4096
TIE_TOLERANCE = 1e-9


class BidderDistribution:
    """A prior with positive density on an interval support."""

    support: tuple[float, float] = (0.0, math.inf)
    is_regular: bool = False

    def cdf(self, v):
        raise NotImplementedError

    def pdf(self, v):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    def sample(self, rng, size=None):
        return self.ppf(rng.random(size))

    def virtual_inverse(self, z: float) -> float:
        raise NotImplementedError(f"{type(self).__name__} has no exact virtual inverse")


def virtual_value(dist: BidderDistribution, v: float) -> float:
    """Virtual value v - (1 - F(v)) / f(v) at a support point with positive density."""
    lo, hi = dist.support
    if not lo <= v <= hi:
        raise OutOfSupport(f"{v} outside support [{lo}, {hi}]")
    density = float(dist.pdf(v))
    if density <= 0.0:
        raise OutOfSupport(f"density vanishes at {v}")
    return v - (1.0 - float(dist.cdf(v))) / density


class Uniform(BidderDistribution):
    """Uniform on [0, high]; virtual value 2v - high."""

    is_regular = True

    def __init__(self, high: float):
        if not high > 0.0:
            raise BadEnv("uniform upper endpoint must be positive")
        self.high = float(high)
        self.support = (0.0, self.high)

    def cdf(self, v):
        return np.clip(np.asarray(v, dtype=float) / self.high, 0.0, 1.0)

    def pdf(self, v):
        return np.where((np.asarray(v) >= 0.0) & (np.asarray(v) <= self.high), 1.0 / self.high, 0.0)

    def ppf(self, q):
        return np.asarray(q, dtype=float) * self.high

    def virtual_inverse(self, z: float) -> float:
        return min(max((z + self.high) / 2.0, 0.0), self.high)


class Exponential(BidderDistribution):
    """Exponential with the given rate; virtual value v - 1/rate."""

    is_regular = True

    def __init__(self, rate: float):
        if not rate > 0.0:
            raise BadEnv("exponential rate must be positive")
        self.rate = float(rate)
        self.support = (0.0, math.inf)

    def cdf(self, v):
        return -np.expm1(-self.rate * np.asarray(v, dtype=float))

    def pdf(self, v):
        return self.rate * np.exp(-self.rate * np.asarray(v, dtype=float))

    def ppf(self, q):
        with np.errstate(divide="ignore"):
            return -np.log1p(-np.asarray(q, dtype=float)) / self.rate

    def virtual_inverse(self, z: float) -> float:
        return max(z + 1.0 / self.rate, 0.0)


class TruncatedGaussian(BidderDistribution):
    """Gaussian truncated to [lo, hi] so the density is positive on an interval."""

    is_regular = True  # log-concave densities have nondecreasing virtual values

    def __init__(self, mean: float, sd: float, lo: float, hi: float):
        if not (sd > 0.0 and hi > lo >= 0.0):
            raise BadEnv("need sd > 0 and hi > lo >= 0")
        self.mean, self.sd = float(mean), float(sd)
        self.support = (float(lo), float(hi))
        a, b = (lo - mean) / sd, (hi - mean) / sd
        self._dist = stats.truncnorm(a, b, loc=mean, scale=sd)

    def cdf(self, v):
        return self._dist.cdf(v)

    def pdf(self, v):
        return self._dist.pdf(v)

    def ppf(self, q):
        return self._dist.ppf(q)

    def virtual_inverse(self, z: float) -> float:
        lo, hi = self.support
        if z <= virtual_value(self, lo):
            return lo
        if z >= hi:  # virtual value at hi equals hi
            return hi
        return float(optimize.brentq(lambda v: virtual_value(self, v) - z, lo, hi, xtol=1e-12))


class PiecewiseLinearCdf(BidderDistribution):
    """CDF interpolated linearly through (value, F) knots; density is piecewise constant.

    The workhorse for irregular fixtures such as two-hump value distributions.
    """

    is_regular = False

    def __init__(self, knots: Sequence[tuple[float, float]]):
        if len(knots) < 2:
            raise BadEnv("need at least 2 cdf knots")
        vs = [float(v) for v, _ in knots]
        fs = [float(f) for _, f in knots]
        if fs[0] != 0.0 or fs[-1] != 1.0:
            raise BadEnv("cdf knots must start at F=0 and end at F=1")
        if any(b <= a for a, b in zip(vs, vs[1:])) or any(b <= a for a, b in zip(fs, fs[1:])):
            raise BadEnv("cdf knots must be strictly increasing in value and mass")
        if vs[0] < 0.0:
            raise BadEnv("support must be nonnegative")
        self._vs = np.asarray(vs)
        self._fs = np.asarray(fs)
        self._slopes = np.diff(self._fs) / np.diff(self._vs)
        self.support = (vs[0], vs[-1])

    def cdf(self, v):
        return np.interp(v, self._vs, self._fs)

    def pdf(self, v):
        idx = np.clip(np.searchsorted(self._vs, v, side="right") - 1, 0, len(self._slopes) - 1)
        inside = (np.asarray(v) >= self._vs[0]) & (np.asarray(v) <= self._vs[-1])
        return np.where(inside, self._slopes[idx], 0.0)

    def ppf(self, q):
        return np.interp(q, self._fs, self._vs)


class ExactCurve:
    """Virtual-value interface of a regular prior: no ironing needed."""

    def __init__(self, dist: BidderDistribution):
        self.dist = dist

    def ironed_virtual(self, v: float) -> float:
        return virtual_value(self.dist, v)

    def ironed_inverse(self, z: float) -> float:
        return float(self.dist.virtual_inverse(z))

    def tie_interval(self, z: float) -> tuple[float, float]:
        x = self.ironed_inverse(z)
        return (x, x)


@dataclass(frozen=True)
class IronedCurve:
    """Quantile-grid ironing of one prior.

    ``slopes[j]`` is the hull slope on quantile cell [j/G, (j+1)/G]; read as a
    function of value it is the ironed virtual value, nondecreasing by
    construction and constant across each ironed interval.
    """

    dist: BidderDistribution
    grid_size: int
    quantiles: np.ndarray
    revenue: np.ndarray
    hull: np.ndarray
    slopes: np.ndarray

    @classmethod
    def build(cls, dist: BidderDistribution, grid_size: int = DEFAULT_GRID_SIZE) -> "IronedCurve":
        if grid_size < 16:
            raise BadGrid(f"grid size must be at least 16, got {grid_size}")
        qs = np.linspace(0.0, 1.0, grid_size + 1)
        values = np.asarray(dist.ppf(1.0 - qs), dtype=float).copy()
        values[0] = 0.0  # q * F^{-1}(1-q) -> 0 even on unbounded supports
        revenue = qs * values
        if not np.all(np.isfinite(revenue)):
            raise BadGrid("revenue curve is not finite on the grid")
        hull = _least_concave_majorant(qs, revenue)
        slopes = np.diff(hull) * grid_size
        slopes = np.minimum.accumulate(slopes)  # squash last-ulp jitter within hull edges
        return cls(dist, grid_size, qs, revenue, hull, slopes)

    def _cell(self, v: float) -> int:
        q = 1.0 - float(self.dist.cdf(v))
        return min(max(int(q * self.grid_size), 0), self.grid_size - 1)

    def ironed_virtual(self, v: float) -> float:
        return float(self.slopes[self._cell(v)])

    def ironed_inverse(self, z: float) -> float:
        """Infimum of the preimage; support endpoints when the preimage is empty."""
        lo, hi = self.dist.support
        if z > self.slopes[0]:
            return float(hi)
        if z < self.slopes[-1]:
            return float(lo)
        # slopes are nonincreasing in q: the last cell at or above z is the
        # lowest-value stretch where the ironed virtual value still reaches z
        j = _last_at_least(self.slopes, z)
        return float(self.dist.ppf(1.0 - self.quantiles[j + 1]))

    def tie_interval(self, z: float, tolerance: float = TIE_TOLERANCE) -> tuple[float, float]:
        """Value endpoints [a, b] of the stretch where the ironed value equals z."""
        close = np.nonzero(np.abs(self.slopes - z) <= tolerance)[0]
        if close.size == 0:
            x = self.ironed_inverse(z)
            return (x, x)
        a = float(self.dist.ppf(1.0 - self.quantiles[close[-1] + 1]))
        b = float(self.dist.ppf(1.0 - self.quantiles[close[0]]))
        return (a, b)


def _least_concave_majorant(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Upper concave hull of the points, evaluated back at every x."""
    hull_x: list[float] = []
    hull_y: list[float] = []
    for x, y in zip(xs, ys):
        while len(hull_x) >= 2:
            cross = (hull_x[-1] - hull_x[-2]) * (y - hull_y[-2]) - \
                    (x - hull_x[-2]) * (hull_y[-1] - hull_y[-2])
            if cross >= 0.0:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(float(x))
        hull_y.append(float(y))
    return np.interp(xs, hull_x, hull_y)


def _last_at_least(slopes: np.ndarray, z: float) -> int:
    """Index of the last entry >= z in a nonincreasing array."""
    lo, hi = 0, len(slopes) - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if slopes[mid] >= z:
            lo = mid
        else:
            hi = mid - 1
    return lo


def iron_distribution(dist: BidderDistribution, grid_size: int = DEFAULT_GRID_SIZE) -> IronedCurve:
    """Quantile-grid ironed curve of a prior (see :class:`IronedCurve`)."""
    return IronedCurve.build(dist, grid_size)


def value_curve(dist: BidderDistribution, grid_size: int = DEFAULT_GRID_SIZE):
    """Exact curve for regular families, ironed curve otherwise."""
    return ExactCurve(dist) if dist.is_regular else IronedCurve.build(dist, grid_size)


class MyersonAuction:
    """Revenue-optimal k-unit auction for independent (possibly irregular) priors.

    Awards units to the highest positive ironed virtual values. When a tie
    group straddles the supply boundary, the remaining units go to a uniformly
    random subset of the group; a rationed winner pays the left endpoint of
    its tie interval, while a bidder strictly above the boundary pays the
    q'-weighted average of its endpoints, q' being its hypothetical win
    probability after dropping into the group.
    """

    def __init__(self, dists: Sequence[BidderDistribution], k: int,
                 grid_size: int = DEFAULT_GRID_SIZE, tie_tolerance: float = TIE_TOLERANCE):
        if k < 1:
            raise BadSupply(f"supply must be at least 1, got {k}")
        self.dists = list(dists)
        self.k = int(k)
        self.tie_tolerance = float(tie_tolerance)
        self.curves = [value_curve(d, grid_size) for d in self.dists]

    def run(self, profile: Sequence[float], coins=None) -> AuctionOutcome:
        values = tuple(profile)
        n = len(values)
        if n != len(self.dists):
            raise LengthMismatch(f"{n} bids vs {len(self.dists)} priors")
        k = self.k
        ironed = [self.curves[i].ironed_virtual(values[i]) for i in range(n)]
        order = sorted(range(n), key=lambda i: (-ironed[i], i))
        positive = [i for i in order if ironed[i] > 0.0]

        meta: dict = {"ironed_values": tuple(ironed)}
        sales: dict[int, float] = {}
        if len(positive) <= k:
            cutoff = max(0.0, ironed[order[k]]) if n > k else 0.0
            for i in positive:
                sales[i + 1] = self._clamp(self.curves[i].ironed_inverse(cutoff), values[i])
            meta["cutoff_virtual"] = cutoff
            return AuctionOutcome.from_sales(values, sales, meta)

        boundary = ironed[positive[k - 1]]
        group = [i for i in positive if abs(ironed[i] - boundary) <= self.tie_tolerance]
        above = [i for i in positive if ironed[i] > boundary + self.tie_tolerance]
        remaining = k - len(above)
        if len(group) == remaining:
            cutoff = max(0.0, ironed[positive[k]])
            for i in above + group:
                sales[i + 1] = self._clamp(self.curves[i].ironed_inverse(cutoff), values[i])
            meta["cutoff_virtual"] = cutoff
            return AuctionOutcome.from_sales(values, sales, meta)

        # rationing: the tie group straddles the supply boundary
        rng = as_generator(coins) if coins is not None else None
        if rng is None:
            raise ValueError("tie rationing needs coins")
        chosen = sorted(rng.choice(sorted(group), size=remaining, replace=False).tolist())
        q = remaining / len(group)
        q_prime = (remaining + 1) / (len(group) + 1)
        for i in above:
            a, b = self._tie_interval(i, boundary)
            sales[i + 1] = self._clamp(q_prime * a + (1.0 - q_prime) * b, values[i])
        for i in chosen:
            a, _ = self._tie_interval(i, boundary)
            sales[i + 1] = self._clamp(a, values[i])
        meta.update(boundary_virtual=boundary, tie_group=frozenset(i + 1 for i in group),
                    strictly_above=frozenset(i + 1 for i in above),
                    win_probability=q, drop_in_probability=q_prime)
        return AuctionOutcome.from_sales(values, sales, meta)

    def _tie_interval(self, i: int, z: float) -> tuple[float, float]:
        curve = self.curves[i]
        if isinstance(curve, IronedCurve):
            return curve.tie_interval(z, self.tie_tolerance)
        return curve.tie_interval(z)

    @staticmethod
    def _clamp(price: float, value: float) -> float:
        # grid quantization must never charge beyond the bid
        return min(max(price, 0.0), value)


def myerson_k_unit(dists: Sequence[BidderDistribution], profile: Sequence[float], k: int,
                   coins=None, grid_size: int = DEFAULT_GRID_SIZE) -> AuctionOutcome:
    """One-shot run of :class:`MyersonAuction`; build the class once for loops."""
    return MyersonAuction(dists, k, grid_size).run(profile, coins)


def pointwise_ordered_check(dists: Sequence[BidderDistribution], z_grid: Sequence[float],
                            grid_size: int = DEFAULT_GRID_SIZE,
                            tolerance: float | None = None) -> bool:
    """True iff ironed-inverse prices are nonincreasing in the bidder index for every z.

    The default tolerance absorbs quantile-grid quantization of ironed curves.
    """
    if any(z < 0.0 for z in z_grid):
        raise BadGrid("z grid must be nonnegative")
    curves = [value_curve(d, grid_size) for d in dists]
    if tolerance is None:
        spans = [
            (c.dist.support[1] - c.dist.support[0]) / c.grid_size
            for c in curves if isinstance(c, IronedCurve) and math.isfinite(c.dist.support[1])
        ]
        tolerance = 1e-9 + 4.0 * max(spans, default=0.0)
    for z in z_grid:
        prices = [c.ironed_inverse(float(z)) for c in curves]
        if any(b > a + tolerance for a, b in zip(prices, prices[1:])):
            return False
    return True


def well_behaved_estimate(dists: Sequence[BidderDistribution], k: int, trials: int, coins,
                          grid_size: int = DEFAULT_GRID_SIZE) -> float:
    """Monte Carlo fraction of optimal-auction revenue from payments above the
    realized second-highest valuation."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if len(dists) < 2:
        raise ProfileTooSmall("the diagnostic needs at least 2 bidders")
    auction = MyersonAuction(dists, k, grid_size)
    rng = as_generator(coins)
    draws = rng.random((trials, len(dists)))
    columns = [np.asarray(d.ppf(draws[:, j]), dtype=float) for j, d in enumerate(dists)]
    total, above = 0.0, 0.0
    for t in range(trials):
        profile = tuple(col[t] for col in columns)
        outcome = auction.run(profile, rng)
        if not outcome.payments:
            continue
        v2 = second_highest(profile)
        total += outcome.revenue
        above += sum(p for p in outcome.payments.values() if p > v2)
    return above / total if total > 0.0 else 0.0

"""Exact revenue benchmarks for ordered bidders.

Four maximizations over posted-price vectors that are nonincreasing in the
bidder ordering and capped at the second-highest bid: the single-price
optimum, the monotone optimum (unlimited supply), the monotone optimum
restricted to a geometric price ladder, and the k-unit monotone optimum with
revenue-optimal tie-breaking. Each dynamic program has a brute-force twin
used as an oracle in the test suite.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import (
    BadSupply,
    Profile,
    ProfileTooLarge,
    ProfileTooSmall,
    collects,
    revenue_at_prices,
    second_highest,
)

NEG_INF = float("-inf")


@dataclass(frozen=True)
class BenchmarkResult:
    """Optimal value, the tie-broken argmax price vector, and its winner set."""

    value: float
    prices: tuple[float, ...]
    winners: frozenset[int]


@dataclass(frozen=True)
class PriceLevelGrid:
    """Geometric price ladder top, top/w, top/w^2, ... with ``depth`` levels."""

    w: float
    top: float
    depth: int

    def __post_init__(self):
        if not self.w > 1.0:
            raise ValueError("level ratio w must exceed 1")
        if self.top < 0.0:
            raise ValueError("grid top must be nonnegative")
        if self.depth < 0:
            raise ValueError("grid depth must be nonnegative")

    @property
    def levels(self) -> tuple[float, ...]:
        if self.top <= 0.0:
            return ()
        return tuple(self.top / self.w**k for k in range(self.depth))

    @classmethod
    def for_training(cls, training: Profile, w: float = 25.0, max_depth: int = 64) -> "PriceLevelGrid":
        """Ladder anchored at the training profile's second-highest value.

        Depth is the smallest count whose last level sits strictly below the
        smallest positive training value; deeper levels cannot raise revenue,
        they only let the solver price trailing bidders out of the market.
        """
        top = second_highest(training) if len(training) >= 2 else 0.0
        if top <= 0.0:
            return cls(w=w, top=0.0, depth=0)
        min_positive = min(v for v in training if v > 0.0)
        k = 1
        while k < max_depth - 1 and top / w**k >= min_positive:
            k += 1
        return cls(w=w, top=top, depth=k + 1)


def _candidate_prices(values: Profile, cap: float) -> list[float]:
    """Distinct profile values up to ``cap``, descending, with 0 appended."""
    return sorted({float(v) for v in values if v <= cap} | {0.0}, reverse=True)


def _unlimited_winners(values: Profile, prices: tuple[float, ...]) -> frozenset[int]:
    return frozenset(i + 1 for i, (v, p) in enumerate(zip(values, prices)) if collects(v, p))


def _monotone_dp(values: Profile, candidates: list[float]) -> tuple[float, tuple[float, ...]]:
    """Maximize collected revenue over nonincreasing vectors drawn from ``candidates``.

    Among the optima, reconstructs the lexicographically smallest price vector
    (scanning bidders left to right, preferring lower prices).
    """
    n, m = len(values), len(candidates)
    if n == 0 or m == 0:
        return 0.0, (0.0,) * n
    v = np.asarray(values, dtype=float)
    c = np.asarray(candidates, dtype=float)
    gain = np.where((v[:, None] >= c[None, :]) & (c[None, :] > 0.0), c[None, :], 0.0)

    # dp[i][j] = best revenue from bidders i.. when prices must stay <= candidates[j]
    dp: list[np.ndarray] = [np.zeros(m)] * (n + 1)
    for i in range(n - 1, -1, -1):
        t = gain[i] + dp[i + 1]
        dp[i] = np.maximum.accumulate(t[::-1])[::-1]

    prices: list[float] = []
    j = 0
    for i in range(n):
        t = gain[i] + dp[i + 1]
        hits = np.nonzero(t[j:] == dp[i][j])[0]
        j = j + int(hits[-1])
        prices.append(float(c[j]))
    return float(dp[0][0]), tuple(prices)


def fixed_price_benchmark(profile: Profile) -> BenchmarkResult:
    """Best revenue from one common posted price capped at the second-highest bid.

    Ties among optimal prices break toward the higher price.
    """
    n = len(profile)
    if n < 2:
        raise ProfileTooSmall("fixed-price benchmark needs at least 2 bidders")
    cap = second_highest(profile)
    best_value, best_price = 0.0, 0.0
    for p in sorted({v for v in profile if 0.0 < v <= cap}):
        rev = p * sum(1 for v in profile if v >= p)
        if rev > best_value or (rev == best_value and p > best_price):
            best_value, best_price = rev, p
    prices = (best_price,) * n
    return BenchmarkResult(best_value, prices, _unlimited_winners(profile, prices))


def monotone_benchmark(profile: Profile) -> BenchmarkResult:
    """Best revenue from a nonincreasing price vector capped at the second-highest bid."""
    if len(profile) < 2:
        raise ProfileTooSmall("monotone benchmark needs at least 2 bidders")
    candidates = _candidate_prices(profile, second_highest(profile))
    value, prices = _monotone_dp(profile, candidates)
    return BenchmarkResult(value, prices, _unlimited_winners(profile, prices))


def monotone_benchmark_brute_force(profile: Profile) -> BenchmarkResult:
    """Exhaustive twin of :func:`monotone_benchmark` over the same candidate grid."""
    n = len(profile)
    if n < 2:
        raise ProfileTooSmall("monotone benchmark needs at least 2 bidders")
    if n > 10:
        raise ProfileTooLarge("brute force is guarded to n <= 10")
    candidates = _candidate_prices(profile, second_highest(profile))
    best_value, best_prices = -1.0, None
    for vec in itertools.combinations_with_replacement(candidates, n):
        rev = revenue_at_prices(profile, vec)
        if rev > best_value or (rev == best_value and vec < best_prices):
            best_value, best_prices = rev, vec
    return BenchmarkResult(best_value, best_prices, _unlimited_winners(profile, best_prices))


def leveled_monotone_optimum(training: Profile, grid: PriceLevelGrid) -> BenchmarkResult:
    """Monotone optimum with every price restricted to the grid's ladder levels.

    A degenerate grid (top 0, e.g. fewer than two positive training bidders)
    yields the zero benchmark with an all-zero price vector rather than an error.
    """
    n = len(training)
    if grid.top <= 0.0:
        return BenchmarkResult(0.0, (0.0,) * n, frozenset())
    value, prices = _monotone_dp(training, list(grid.levels))
    return BenchmarkResult(value, prices, _unlimited_winners(training, prices))


def _k_unit_tables(values: Profile, candidates: list[float], k: int) -> list[list[list[float]]]:
    """Value tables for the supply-limited monotone optimum.

    tables[i][j][u] is the best revenue from bidders i.. onward when prices
    must stay <= candidates[j] and u units are already committed. A bidder
    strictly above its price is a forced sale consuming a unit (even at price
    0), a bidder exactly at a positive price may be served or skipped, and
    everything else collects nothing.
    """
    n, m = len(values), len(candidates)
    cap = min(k, n)
    tables: list[list[list[float]]] = [None] * (n + 1)  # type: ignore[assignment]
    tables[n] = [[0.0] * (cap + 1) for _ in range(m)]
    for i in range(n - 1, -1, -1):
        vi = values[i]
        nxt = tables[i + 1]
        cur: list[list[float]] = [None] * m  # type: ignore[assignment]
        below: list[float] | None = None
        for j in range(m - 1, -1, -1):
            cj = candidates[j]
            base = nxt[j]
            if vi > cj:
                row = [cj + base[u + 1] if u < cap else NEG_INF for u in range(cap + 1)]
            elif vi == cj and cj > 0.0:
                row = [max(base[u], cj + base[u + 1]) if u < cap else base[u]
                       for u in range(cap + 1)]
            else:
                row = list(base)
            if below is not None:
                row = [a if a >= b else b for a, b in zip(row, below)]
            cur[j] = row
            below = row
        tables[i] = cur
    return tables


def _k_unit_argmax(values: Profile, candidates: list[float], k: int,
                   tables: list[list[list[float]]]) -> tuple[float, ...]:
    """Lexicographically smallest optimal price vector from the value tables.

    Tracks the full frontier of unit counts reachable along optimal paths so
    the greedy left-to-right price choice is exact even when serving and
    skipping a tied bidder are both optimal.
    """
    n, m = len(values), len(candidates)
    cap = min(k, n)
    prices: list[float] = []
    j = 0
    live = {0}
    for i in range(n):
        vi = values[i]
        nxt = tables[i + 1]
        cur = tables[i][j]
        chosen = None
        for l in range(m - 1, j - 1, -1):
            cl = candidates[l]
            reachable = set()
            for u in live:
                target = cur[u]
                if target == NEG_INF:
                    continue
                if vi > cl:
                    if u < cap and cl + nxt[l][u + 1] == target:
                        reachable.add(u + 1)
                elif vi == cl and cl > 0.0:
                    if nxt[l][u] == target:
                        reachable.add(u)
                    if u < cap and cl + nxt[l][u + 1] == target:
                        reachable.add(u + 1)
                else:
                    if nxt[l][u] == target:
                        reachable.add(u)
            if reachable:
                chosen = (l, reachable)
                break
        if chosen is None:  # unreachable for feasible inputs
            raise AssertionError("argmax reconstruction lost the optimal path")
        j, live = chosen[0], chosen[1]
        prices.append(float(candidates[j]))
    return tuple(prices)


def _admit_winners(values: Profile, prices: tuple[float, ...], k: int) -> frozenset[int]:
    """Winner set under supply k: forced sales plus ties admitted highest price first."""
    strict = [i + 1 for i, (v, p) in enumerate(zip(values, prices)) if v > p]
    ties = sorted(
        ((p, i + 1) for i, (v, p) in enumerate(zip(values, prices)) if v == p and p > 0.0),
        key=lambda t: (-t[0], t[1]),
    )
    admitted = [i for _, i in ties[: max(0, k - len(strict))]]
    return frozenset(strict) | frozenset(admitted)


def k_unit_monotone_benchmark(profile: Profile, k: int) -> BenchmarkResult:
    """Monotone benchmark selling at most k units, breaking payment ties optimally.

    Revenue counts every bidder strictly above its price plus the best
    affordable subset of bidders priced exactly at their bid.
    """
    if len(profile) < 2:
        raise ProfileTooSmall("k-unit benchmark needs at least 2 bidders")
    if k < 1:
        raise BadSupply(f"supply must be at least 1, got {k}")
    candidates = _candidate_prices(profile, second_highest(profile))
    tables = _k_unit_tables(profile, candidates, k)
    value = tables[0][0][0]
    prices = _k_unit_argmax(profile, candidates, k, tables)
    return BenchmarkResult(float(value), prices, _admit_winners(profile, prices, k))


def _k_unit_value(values: Profile, vec: tuple[float, ...], k: int) -> float | None:
    """Revenue of one price vector under supply k; None if infeasible."""
    strict_sum, strict_n = 0.0, 0
    ties: list[float] = []
    for v, p in zip(values, vec):
        if v > p:
            strict_n += 1
            strict_sum += p
        elif v == p and p > 0.0:
            ties.append(p)
    if strict_n > k:
        return None
    ties.sort(reverse=True)
    return strict_sum + sum(ties[: k - strict_n])


def k_unit_benchmark_brute_force(profile: Profile, k: int) -> BenchmarkResult:
    """Exhaustive twin of :func:`k_unit_monotone_benchmark` over the same grid."""
    n = len(profile)
    if n < 2:
        raise ProfileTooSmall("k-unit benchmark needs at least 2 bidders")
    if n > 10:
        raise ProfileTooLarge("brute force is guarded to n <= 10")
    if k < 1:
        raise BadSupply(f"supply must be at least 1, got {k}")
    candidates = _candidate_prices(profile, second_highest(profile))
    best_value, best_prices = -1.0, None
    for vec in itertools.combinations_with_replacement(candidates, n):
        rev = _k_unit_value(profile, vec, k)
        if rev is None:
            continue
        if rev > best_value or (rev == best_value and vec < best_prices):
            best_value, best_prices = rev, vec
    return BenchmarkResult(best_value, best_prices, _admit_winners(profile, best_prices, k))


def projection_monotonicity_check(profile: Profile, k: int) -> bool:
    """True iff dropping bidders never raises the k-unit benchmark.

    Exhaustive over all sub-profiles with at least two bidders, so the guard
    keeps n small.
    """
    n = len(profile)
    if n > 8:
        raise ProfileTooLarge("projection check is guarded to n <= 8")
    full = k_unit_monotone_benchmark(profile, k).value
    ids = range(1, n + 1)
    for size in range(2, n + 1):
        for subset in itertools.combinations(ids, size):
            sub = tuple(profile[i - 1] for i in subset)
            if k_unit_monotone_benchmark(sub, k).value > full:
                return False
    return True

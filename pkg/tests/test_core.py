import math
import random

import pytest

from priorfree.core import (
    AuctionError,
    AuctionOutcome,
    BadConfig,
    CoinStream,
    IndexOutOfRange,
    LengthMismatch,
    ProfileTooSmall,
    mask_to_subset,
    read_profile,
    revenue_at_prices,
    second_highest,
    validate_profile,
)


def test_second_highest_examples():
    assert second_highest((5, 1, 4)) == 4
    assert second_highest((4, 4)) == 4
    with pytest.raises(ProfileTooSmall):
        second_highest((7,))


def test_second_highest_permutation_invariant():
    rng = random.Random(1)
    for _ in range(100):
        vals = [rng.randint(0, 9) for _ in range(rng.randint(2, 8))]
        shuffled = vals[:]
        rng.shuffle(shuffled)
        assert second_highest(vals) == second_highest(shuffled)


def test_mask_examples():
    assert mask_to_subset((10, 8, 6, 4), {1, 2}) == (10, 8, 0, 0)
    v = (3.0, 1.0, 2.0)
    assert mask_to_subset(v, {1, 2, 3}) == v
    assert mask_to_subset((3, 3), set()) == (0, 0)
    with pytest.raises(IndexOutOfRange):
        mask_to_subset((3, 3), {5})


def test_revenue_examples():
    assert revenue_at_prices((4, 4, 2, 2), (4, 4, 2, 2)) == 12
    assert revenue_at_prices((5, 1, 4), (0, 0, 0)) == 0
    # masked zeros never pay a positive price
    assert revenue_at_prices((10, 8, 0, 0), (8, 8, 0.32, 0.32)) == 16
    with pytest.raises(LengthMismatch):
        revenue_at_prices((1, 2), (1,))


def test_mask_partition_additivity():
    """Splitting bidders across two masks splits the revenue exactly (no zero prices)."""
    rng = random.Random(2)
    for _ in range(200):
        n = rng.randint(1, 8)
        v = tuple(float(rng.randint(0, 9)) for _ in range(n))
        p = tuple(float(rng.randint(1, 9)) for _ in range(n))
        part_a = {i for i in range(1, n + 1) if rng.random() < 0.5}
        part_b = set(range(1, n + 1)) - part_a
        total = revenue_at_prices(mask_to_subset(v, part_a), p) + \
            revenue_at_prices(mask_to_subset(v, part_b), p)
        assert total == revenue_at_prices(v, p)


def test_validate_profile_rejects_bad_values():
    with pytest.raises(ValueError):
        validate_profile([1.0, -0.5])
    with pytest.raises(ValueError):
        validate_profile([math.inf])


def test_coinstream_replay_and_independence():
    a = CoinStream(42, (3,))
    assert a.rng().random(5).tolist() == a.rng().random(5).tolist()
    assert a.rng().random(5).tolist() == CoinStream(42, (3,)).rng().random(5).tolist()
    b = CoinStream(42, (4,))
    assert a.rng().random(5).tolist() != b.rng().random(5).tolist()
    assert a.child(7).key == (3, 7)
    with pytest.raises(ValueError):
        CoinStream(-1)


def test_read_profile(tmp_path):
    path = tmp_path / "profile.txt"
    path.write_text("3\n2\n\n2\n", encoding="utf-8")
    assert read_profile(path) == (3.0, 2.0, 2.0)
    bad = tmp_path / "bad.txt"
    bad.write_text("3\nx\n", encoding="utf-8")
    with pytest.raises(BadConfig):
        read_profile(bad)
    neg = tmp_path / "neg.txt"
    neg.write_text("-1\n", encoding="utf-8")
    with pytest.raises(BadConfig):
        read_profile(neg)


def test_outcome_accounting():
    out = AuctionOutcome.from_sales((5, 3, 2), {1: 4.0, 3: 2.0}, {"branch": "x"})
    assert out.winners == frozenset({1, 3})
    assert out.revenue == 6.0
    assert out.payments == {1: 4.0, 3: 2.0}
    with pytest.raises(AuctionError):
        AuctionOutcome.from_sales((5, 3), {2: 3.5})  # pays above its bid
    with pytest.raises(IndexOutOfRange):
        AuctionOutcome.from_sales((5, 3), {4: 1.0})

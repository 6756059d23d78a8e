import math

import pytest

from adaptive_oco import IntervalKey, intervals_containing, intervals_starting_at, learning_rate_grid, partition_interval
from adaptive_oco.exceptions import InvalidArgumentError
from adaptive_oco.schedule import ceil_log2, grid_size, max_active_experts


def spans(keys):
    return [(k.r, k.s) for k in keys]


def test_interval_key_geometry():
    key = IntervalKey(3, 5)
    assert (key.r, key.s, key.length) == (40, 47, 8)
    assert 40 in key and 47 in key and 48 not in key
    assert str(key) == "[40,47]"


@pytest.mark.parametrize(
    "t, expected",
    [
        (1, [(1, 1)]),
        (4, [(4, 4), (4, 5), (4, 7)]),
        (16, [(16, 16), (16, 17), (16, 19), (16, 23), (16, 31)]),
        (6, [(6, 6), (6, 7)]),
        (7, [(7, 7)]),
    ],
)
def test_intervals_starting_at(t, expected):
    assert spans(intervals_starting_at(t)) == expected


def test_intervals_containing_examples():
    assert spans(intervals_containing(1)) == [(1, 1)]
    assert spans(intervals_containing(4)) == [(4, 4), (4, 5), (4, 7)]
    assert spans(intervals_containing(6)) == [(6, 6), (6, 7), (4, 7)]


def test_containing_count_cover_and_one_per_level():
    for t in range(1, 4097):
        keys = intervals_containing(t)
        assert len(keys) == math.floor(math.log2(t)) + 1
        assert all(k.r <= t <= k.s for k in keys)
        assert [k.k for k in keys] == list(range(len(keys)))


def test_levels_tile_without_gaps_or_overlaps():
    T = 4096
    for k in range(13):
        covered = []
        t = 1 << k
        while t <= T:
            key = next(x for x in intervals_starting_at(t) if x.k == k)
            covered.extend(range(key.r, key.s + 1))
            t = key.s + 1
        assert covered[: T - (1 << k) + 1] == list(range(1 << k, T + 1))


def test_starting_and_containing_consistent():
    for t in range(1, 1025):
        for key in intervals_containing(t):
            assert key in intervals_starting_at(key.r)
        for key in intervals_starting_at(t):
            for u in (key.r, key.s):
                assert key in intervals_containing(u)
            assert key not in intervals_containing(key.s + 1)


def test_invalid_rounds():
    for bad in (0, -3, 2.5):
        with pytest.raises(InvalidArgumentError):
            intervals_starting_at(bad)


@pytest.mark.parametrize("n, expected", [(1, [0.2]), (4, [0.2, 0.1]), (2, [0.2, 0.1]), (5, [0.2, 0.1, 0.05])])
def test_learning_rate_grid_examples(n, expected):
    assert learning_rate_grid(n, 1.0, 1.0) == pytest.approx(expected, rel=1e-15)


def test_learning_rate_grid_size_and_ratio():
    for n in range(1, 5000):
        grid = learning_rate_grid(n, 2.0, 3.0)
        assert len(grid) == 1 + math.ceil(0.5 * math.log2(n) - 1e-12)
        assert grid[0] == 1 / 30
        assert all(b / a == 0.5 for a, b in zip(grid, grid[1:]))


def test_grid_rejects_bad_inputs():
    with pytest.raises(InvalidArgumentError):
        learning_rate_grid(0, 1, 1)
    with pytest.raises(InvalidArgumentError):
        learning_rate_grid(4, 0, 1)


def test_ceil_log2_exact():
    for n in range(1, 10_000):
        assert 2 ** ceil_log2(n) >= n > 2 ** (ceil_log2(n) - 1)


def test_max_active_experts_formula():
    for t in range(1, 2000):
        assert max_active_experts(t) == (math.floor(math.log2(t)) + 1) * (1 + math.ceil(0.5 * math.log2(t) - 1e-12))
        assert grid_size(t) == len(learning_rate_grid(t, 1, 1))


def _satisfies_ratio_conditions(left, right):
    ok_left = all(a.length / b.length <= 0.5 for a, b in zip(left, left[1:]))
    ok_right = all(b.length / a.length <= 0.5 for a, b in zip(right, right[1:]))
    return ok_left and ok_right


def _all_gc_partitions(p, q):
    if p > q:
        yield []
        return
    for key in intervals_starting_at(p):
        if key.s <= q:
            for rest in _all_gc_partitions(key.s + 1, q):
                yield [key] + rest


def test_partition_examples():
    assert partition_interval(5, 5) == ([IntervalKey(0, 5)], [])
    left, right = partition_interval(2, 7)
    assert spans(left + right) == [(2, 3), (4, 7)]
    # brute force: among all GC partitions of [2,7], ours satisfies the ratio conditions
    valid = []
    for pieces in _all_gc_partitions(2, 7):
        for cut in range(1, len(pieces) + 1):
            if _satisfies_ratio_conditions(pieces[:cut], pieces[cut:]):
                valid.append(spans(pieces))
    assert spans(left + right) in valid


def test_partition_exhaustive():
    for q in range(1, 129):
        for p in range(1, q + 1):
            left, right = partition_interval(p, q)
            pieces = left + right
            assert [t for k in pieces for t in range(k.r, k.s + 1)] == list(range(p, q + 1))
            assert _satisfies_ratio_conditions(left, right)
            limit = ceil_log2(q - p + 2)
            assert len(right) <= limit and len(left) <= limit


def test_partition_rejects_reversed():
    with pytest.raises(InvalidArgumentError):
        partition_interval(5, 4)

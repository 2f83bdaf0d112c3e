import math

import numpy as np
import pytest

from warpquery import (
    TimeSeries,
    best_match,
    dtw_distance,
    find_repetitions,
    matching_profile,
    path_cost,
)
from warpquery.exceptions import DimensionError


def ts(values):
    return TimeSeries(np.asarray(values, dtype=float))


def exhaustive_best(x, y):
    """Minimum alignment distance over every window of y (slow reference)."""
    best = math.inf
    for a in range(1, len(y) + 1):
        for b in range(a, len(y) + 1):
            best = min(best, dtw_distance(x, y.slice(a, b)))
    return best


def planted_stream(rng, pattern, copies, gap_lo=None, gap_hi=None):
    """Noise-separated exact copies; noise is far above the pattern range."""
    n = pattern.shape[0]
    gap_lo = gap_lo or n + 1
    gap_hi = gap_hi or 2 * n + 4
    chunks = [rng.uniform(10.0, 20.0, int(rng.integers(gap_lo, gap_hi)))]
    positions = []
    total = len(chunks[0])
    for _ in range(copies):
        positions.append(total + 1)
        chunks.append(pattern)
        total += n
        gap = rng.uniform(10.0, 20.0, int(rng.integers(gap_lo, gap_hi)))
        chunks.append(gap)
        total += len(gap)
    return np.concatenate(chunks), positions


class TestMatchingProfile:
    def test_worked_example(self):
        profile = matching_profile(ts([0, 0]), ts([4, 1, 0, 4]))
        np.testing.assert_allclose(profile.values, [8, 2, 0, 4])

    def test_second_example(self):
        profile = matching_profile(ts([1, 2]), ts([5, 5, 1, 2, 5]))
        np.testing.assert_allclose(profile.values, [7, 7, 1, 0, 3])

    def test_self_match_ends_at_zero(self):
        rng = np.random.default_rng(5)
        x = TimeSeries(rng.normal(size=(2, 7)))
        profile = matching_profile(x, x)
        assert profile.values[-1] == pytest.approx(0.0, abs=1e-12)

    def test_profile_lower_bounds_every_window(self):
        rng = np.random.default_rng(41)
        for _ in range(15):
            x = TimeSeries(rng.normal(size=(1, int(rng.integers(1, 5)))))
            y = TimeSeries(rng.normal(size=(1, int(rng.integers(3, 12)))))
            profile = matching_profile(x, y)
            for a in range(1, len(y) + 1):
                for b in range(a, len(y) + 1):
                    assert profile.values[b - 1] <= dtw_distance(x, y.slice(a, b)) + 1e-9

    def test_mask_reads_as_infinite(self):
        profile = matching_profile(ts([0, 0]), ts([4, 1, 0, 4]))
        profile.exclude_around(3, 1)
        masked = profile.masked_values()
        assert np.isinf(masked[1]) and np.isinf(masked[2]) and np.isinf(masked[3])
        assert masked[0] == 8.0

    def test_channel_mismatch(self):
        with pytest.raises(DimensionError):
            matching_profile(ts([[1, 2]]), ts([[1, 2], [3, 4]]))


class TestBestMatch:
    def test_planted_pair(self):
        match = best_match(ts([1, 2]), ts([5, 5, 1, 2, 5]))
        assert (match.start, match.end) == (3, 4)
        assert match.distance == pytest.approx(0.0, abs=1e-12)

    def test_single_sample_window(self):
        match = best_match(ts([0, 0]), ts([4, 1, 0, 4]))
        assert (match.start, match.end) == (3, 3)
        assert match.distance == pytest.approx(0.0, abs=1e-12)

    def test_whole_stream_self_match(self):
        rng = np.random.default_rng(6)
        x = TimeSeries(rng.normal(size=(3, 9)))
        match = best_match(x, x)
        assert (match.start, match.end) == (1, 9)
        assert match.distance == pytest.approx(0.0, abs=1e-12)

    def test_equals_exhaustive_minimum(self):
        rng = np.random.default_rng(43)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            m = int(rng.integers(n, 31))
            d = int(rng.integers(1, 3))
            x = TimeSeries(rng.uniform(-2, 2, size=(d, n)))
            y = TimeSeries(rng.uniform(-2, 2, size=(d, m)))
            match = best_match(x, y)
            assert match.distance == pytest.approx(exhaustive_best(x, y), abs=1e-9)

    def test_match_distance_equals_path_cost(self):
        rng = np.random.default_rng(47)
        for _ in range(25):
            x = TimeSeries(rng.normal(size=(1, int(rng.integers(2, 7)))))
            y = TimeSeries(rng.normal(size=(1, int(rng.integers(8, 20)))))
            match = best_match(x, y)
            assert path_cost(x, y, match.path) == pytest.approx(match.distance, abs=1e-9)
            assert 1 <= match.start <= match.end <= len(y)


class TestFindRepetitions:
    def test_two_planted_copies(self):
        rng = np.random.default_rng(1)
        pattern = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
        stream, positions = planted_stream(rng, pattern, copies=2)
        matches = find_repetitions(ts(pattern), ts(stream), threshold=1e-6)
        assert len(matches) == 2
        assert sorted(m.start for m in matches) == positions
        for m in matches:
            assert m.distance == pytest.approx(0.0, abs=1e-12)
            assert m.end - m.start + 1 == pattern.shape[0]

    def test_zero_threshold_without_exact_match(self):
        rng = np.random.default_rng(2)
        x = ts(rng.normal(size=5))
        y = ts(rng.normal(size=30) + 100.0)
        assert find_repetitions(x, y, threshold=0.0) == []

    def test_self_stream_single_match(self):
        rng = np.random.default_rng(3)
        x = TimeSeries(rng.normal(size=(1, 12)))
        matches = find_repetitions(x, x, threshold=0.0)
        assert len(matches) == 1
        assert (matches[0].start, matches[0].end) == (1, 12)
        assert matches[0].distance == 0.0

    def test_discovery_order_is_non_decreasing(self):
        rng = np.random.default_rng(53)
        x = TimeSeries(rng.normal(size=(1, 6)))
        y = TimeSeries(rng.normal(size=(1, 80)))
        matches = find_repetitions(x, y, threshold=50.0, exclusion_radius=2)
        assert len(matches) >= 2
        distances = [m.distance for m in matches]
        assert distances == sorted(distances)

    def test_end_positions_separated_by_radius(self):
        rng = np.random.default_rng(59)
        x = TimeSeries(rng.normal(size=(1, 6)))
        y = TimeSeries(rng.normal(size=(1, 80)))
        radius = 4
        matches = find_repetitions(x, y, threshold=50.0, exclusion_radius=radius)
        ends = [m.end for m in matches]
        for i, e1 in enumerate(ends):
            for e2 in ends[i + 1 :]:
                assert abs(e1 - e2) > radius

    def test_all_matches_within_threshold(self):
        rng = np.random.default_rng(61)
        x = TimeSeries(rng.normal(size=(1, 5)))
        y = TimeSeries(rng.normal(size=(1, 60)))
        threshold = 3.0
        for m in find_repetitions(x, y, threshold=threshold):
            assert m.distance <= threshold

    def test_default_radius_is_half_pattern(self):
        x = ts([0.0, 1.0, 2.0, 3.0, 4.0])
        matches = find_repetitions(x, x, threshold=0.0)
        assert len(matches) == 1

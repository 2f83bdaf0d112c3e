import numpy as np
import pytest

from warpquery import (
    Mode,
    SakoeChibaBand,
    TimeSeries,
    WarpingPath,
    accumulate_cost,
    best_path,
    dtw_distance,
    euclidean_cost,
    path_cost,
)
from warpquery.exceptions import BandError, BoundsError, DimensionError

from oracles import brute_force_dtw, random_series_pair


def ts(values):
    return TimeSeries(np.asarray(values, dtype=float))


def check_path_invariants(path, n, m, mode=Mode.GLOBAL):
    steps = path.steps
    diffs = np.diff(steps, axis=0)
    if diffs.size:
        assert np.all(diffs >= 0) and np.all(diffs <= 1)
        assert np.all(diffs.sum(axis=1) >= 1)
    assert len({tuple(s) for s in steps}) == len(steps)
    assert steps[-1][0] == n
    if mode is Mode.GLOBAL:
        assert tuple(steps[0]) == (1, 1)
        assert tuple(steps[-1]) == (n, m)
    else:
        assert steps[0][0] == 1


class TestAccumulate:
    def test_identical_series_zero_diagonal(self):
        x = ts([1, 2, 3])
        matrix = accumulate_cost(x, x)
        assert matrix.entries[3, 3] == 0.0
        assert all(matrix.entries[k, k] == 0.0 for k in range(1, 4))

    def test_first_column_prefix_sums(self):
        matrix = accumulate_cost(ts([3, 1]), ts([2, 2, 2]))
        assert matrix.entries[1, 1] == pytest.approx(1.0)
        assert matrix.entries[2, 1] == pytest.approx(2.0)

    def test_subsequence_rows(self):
        matrix = accumulate_cost(ts([1, 2]), ts([5, 5, 1, 2, 5]), mode=Mode.SUBSEQUENCE)
        np.testing.assert_allclose(matrix.entries[1, 1:], [4, 4, 0, 1, 4])
        np.testing.assert_allclose(matrix.entries[2, 1:], [7, 7, 1, 0, 3])

    def test_global_sentinels(self):
        matrix = accumulate_cost(ts([1, 2]), ts([3, 4, 5]))
        assert matrix.entries[0, 0] == 0.0
        assert np.all(np.isinf(matrix.entries[1:, 0]))
        assert np.all(np.isinf(matrix.entries[0, 1:]))

    def test_boundary_identities_fuzzed(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            xs, ys = random_series_pair(rng)
            matrix = accumulate_cost(TimeSeries(xs.T), TimeSeries(ys.T))
            col = [euclidean_cost(xs[k], ys[0]) for k in range(xs.shape[0])]
            row = [euclidean_cost(xs[0], ys[k]) for k in range(ys.shape[0])]
            np.testing.assert_allclose(matrix.entries[1:, 1], np.cumsum(col), atol=1e-9)
            np.testing.assert_allclose(matrix.entries[1, 1:], np.cumsum(row), atol=1e-9)

    def test_channel_mismatch(self):
        with pytest.raises(DimensionError):
            accumulate_cost(ts([[1, 2]]), ts([[1, 2], [3, 4]]))

    def test_entries_read_only(self):
        matrix = accumulate_cost(ts([1, 2]), ts([1, 2]))
        with pytest.raises(ValueError):
            matrix.entries[1, 1] = 5.0


class TestDistance:
    def test_self_distance_exactly_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = TimeSeries(rng.normal(size=(2, int(rng.integers(1, 9)))))
            assert dtw_distance(x, x) == 0.0

    def test_worked_example(self):
        assert dtw_distance(ts([0, 1, 2]), ts([0, 2])) == pytest.approx(1.0, abs=1e-12)

    def test_constant_vs_singleton(self):
        assert dtw_distance(ts([1, 1, 1, 1]), ts([1])) == 0.0

    def test_matches_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            xs, ys = random_series_pair(rng)
            got = dtw_distance(TimeSeries(xs.T), TimeSeries(ys.T))
            assert got == pytest.approx(brute_force_dtw(xs, ys), abs=1e-9)

    def test_symmetry_fuzzed(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            xs, ys = random_series_pair(rng, n_max=10, m_max=10)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            assert dtw_distance(x, y) == pytest.approx(dtw_distance(y, x), abs=1e-9)

    def test_matches_matrix_corner(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            xs, ys = random_series_pair(rng, n_max=12, m_max=12)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            matrix = accumulate_cost(x, y)
            assert dtw_distance(x, y) == pytest.approx(
                matrix.entries[len(x), len(y)], abs=1e-12
            )


class TestBand:
    def test_wide_band_equals_unbanded(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            xs, ys = random_series_pair(rng, n_max=10, m_max=10)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            wide = SakoeChibaBand(width=max(len(x), len(y)))
            assert dtw_distance(x, y, band=wide) == pytest.approx(
                dtw_distance(x, y), abs=1e-12
            )

    def test_band_never_below_unbanded(self):
        rng = np.random.default_rng(29)
        for _ in range(30):
            xs, ys = random_series_pair(rng, n_max=8, m_max=8)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            width = abs(len(x) - len(y)) + int(rng.integers(0, 3))
            banded = dtw_distance(x, y, band=SakoeChibaBand(width))
            assert banded >= dtw_distance(x, y) - 1e-9
            assert np.isfinite(banded)

    def test_infeasible_band_rejected(self):
        with pytest.raises(BandError):
            dtw_distance(ts([1, 2, 3, 4, 5]), ts([1]), band=SakoeChibaBand(1))

    def test_out_of_band_cells_stay_infinite(self):
        x, y = ts(range(10)), ts(range(10))
        matrix = accumulate_cost(x, y, band=SakoeChibaBand(2))
        assert np.isinf(matrix.entries[1, 9])
        assert np.isinf(matrix.entries[9, 1])
        assert np.isfinite(matrix.entries[10, 10])


class TestBestPath:
    def test_diagonal_for_identical(self):
        matrix = accumulate_cost(ts([4, 5, 6]), ts([4, 5, 6]))
        assert best_path(matrix).as_tuples() == [(1, 1), (2, 2), (3, 3)]

    def test_diagonal_preference_on_tie(self):
        matrix = accumulate_cost(ts([0, 1, 2]), ts([0, 2]))
        assert best_path(matrix).as_tuples() == [(1, 1), (2, 1), (3, 2)]

    def test_subsequence_backtrack(self):
        matrix = accumulate_cost(ts([1, 2]), ts([5, 5, 1, 2, 5]), mode=Mode.SUBSEQUENCE)
        path = best_path(matrix, end_column=4)
        assert path.as_tuples() == [(1, 3), (2, 4)]

    def test_end_column_bounds(self):
        matrix = accumulate_cost(ts([1, 2]), ts([1, 2, 3]))
        with pytest.raises(BoundsError):
            best_path(matrix, end_column=4)

    def test_global_requires_last_column(self):
        matrix = accumulate_cost(ts([1, 2]), ts([1, 2, 3]))
        with pytest.raises(ValueError):
            best_path(matrix, end_column=2)

    def test_invariants_fuzzed(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            xs, ys = random_series_pair(rng, n_max=9, m_max=9)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            path = best_path(accumulate_cost(x, y))
            check_path_invariants(path, len(x), len(y))

    def test_optimal_path_cost_equals_distance(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            xs, ys = random_series_pair(rng, n_max=9, m_max=9)
            x, y = TimeSeries(xs.T), TimeSeries(ys.T)
            path = best_path(accumulate_cost(x, y))
            assert path_cost(x, y, path) == pytest.approx(dtw_distance(x, y), abs=1e-9)


class TestPathCost:
    def test_zero_on_identical_diagonal(self):
        x = ts([1, 2, 3])
        path = WarpingPath(np.array([[1, 1], [2, 2], [3, 3]]))
        assert path_cost(x, x, path) == 0.0

    def test_tied_paths(self):
        x, y = ts([0, 1, 2]), ts([0, 2])
        left = WarpingPath(np.array([[1, 1], [2, 1], [3, 2]]))
        right = WarpingPath(np.array([[1, 1], [2, 2], [3, 2]]))
        assert path_cost(x, y, left) == pytest.approx(1.0, abs=1e-12)
        assert path_cost(x, y, right) == pytest.approx(1.0, abs=1e-12)

    def test_out_of_grid(self):
        x, y = ts([0, 1]), ts([0, 1])
        path = WarpingPath(np.array([[1, 1], [2, 2], [3, 3]]))
        with pytest.raises(BoundsError):
            path_cost(x, y, path)

    def test_invalid_steps_rejected(self):
        with pytest.raises(ValueError):
            WarpingPath(np.array([[1, 1], [3, 1]]))
        with pytest.raises(ValueError):
            WarpingPath(np.array([[2, 2], [1, 1]]))

"""Exact multivariate dynamic time warping.

Accumulated cost matrix, distance, optimal path backtracking, and the
optional Sakoe-Chiba band. The matrix carries one extra sentinel row and
column so the recurrence needs no special cases:

* global mode: ``D[0, 0] = 0`` and every other sentinel is ``+inf``, so
  the alignment is anchored at (1, 1);
* subsequence mode: the whole sentinel row 0 is zero, so row 1 reduces
  to the bare local cost of the first pattern sample and an alignment
  may begin at any stream position.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import backends
from .exceptions import BandError, BoundsError, DimensionError
from .instrumentation import counters
from .series import TimeSeries


class Mode(enum.Enum):
    GLOBAL = "global"
    SUBSEQUENCE = "subsequence"


@dataclass(frozen=True)
class SakoeChibaBand:
    """Corridor half-width, in cells, around the length-rescaled diagonal."""

    width: int

    def __post_init__(self) -> None:
        if self.width < 0:
            raise ValueError(f"band width must be >= 0, got {self.width}")


@dataclass(frozen=True)
class CostMatrix:
    """Accumulated cost matrix with sentinels, shape (n+1, m+1)."""

    entries: np.ndarray
    mode: Mode
    n: int
    m: int

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)

    def last_row(self) -> np.ndarray:
        """Accumulated costs of alignments ending at each stream position."""
        return self.entries[self.n, 1:]


@dataclass(frozen=True)
class WarpingPath:
    """Monotone step-constrained sequence of 1-based (i, j) index pairs."""

    steps: np.ndarray

    def __post_init__(self) -> None:
        steps = np.asarray(self.steps, dtype=np.int64)
        if steps.ndim != 2 or steps.shape[1] != 2 or steps.shape[0] < 1:
            raise ValueError("path steps must be a non-empty (L, 2) array")
        diffs = np.diff(steps, axis=0)
        if diffs.size and not (
            np.all(diffs >= 0)
            and np.all(diffs <= 1)
            and np.all(diffs.sum(axis=1) >= 1)
        ):
            raise ValueError("path steps must advance by (1,0), (0,1) or (1,1)")
        steps = steps.copy()
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)

    def __len__(self) -> int:
        return self.steps.shape[0]

    def __iter__(self):
        return iter(map(tuple, self.steps))

    def as_tuples(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.steps]


def _check_channels(x: TimeSeries, y: TimeSeries) -> None:
    if x.n_channels != y.n_channels:
        raise DimensionError(
            f"channel counts differ: {x.n_channels} vs {y.n_channels}"
        )


def _band_width_value(x: TimeSeries, y: TimeSeries, band: SakoeChibaBand | None, mode: Mode) -> float:
    if band is None:
        return np.inf
    if mode is Mode.GLOBAL and band.width < abs(len(x) - len(y)):
        raise BandError(
            f"band width {band.width} admits no global path for lengths "
            f"{len(x)} and {len(y)} (need >= {abs(len(x) - len(y))})"
        )
    return float(band.width)


def accumulate_cost(
    x: TimeSeries,
    y: TimeSeries,
    mode: Mode = Mode.GLOBAL,
    band: SakoeChibaBand | None = None,
) -> CostMatrix:
    """Fill the accumulated cost matrix for ``x`` against ``y``.

    Cells outside the band stay ``+inf`` and are never treated as
    reachable. The work done (one Euclidean cost per admissible cell) is
    added to the global counters.
    """
    _check_channels(x, y)
    width = _band_width_value(x, y, band, mode)
    entries = backends.accumulate(x.samples, y.samples, mode is Mode.SUBSEQUENCE, width)
    counters.add_cost(backends.band_cell_count(len(x), len(y), width))
    return CostMatrix(entries=entries, mode=mode, n=len(x), m=len(y))


def dtw_distance(
    x: TimeSeries, y: TimeSeries, band: SakoeChibaBand | None = None
) -> float:
    """Minimal total alignment cost between two whole series."""
    _check_channels(x, y)
    width = _band_width_value(x, y, band, Mode.GLOBAL)
    dist = backends.pairwise_distance(x.samples, y.samples, width)
    counters.add_cost(backends.band_cell_count(len(x), len(y), width))
    return float(dist)


def best_path(matrix: CostMatrix, end_column: int | None = None) -> WarpingPath:
    """Backtrack the optimal warping path through an accumulated matrix.

    Ties in the predecessor argmin prefer the diagonal step, then the
    vertical one, then the horizontal one, which keeps paths
    deterministic and as short as possible.

    In global mode the path runs from (1, 1) to (n, m) and ``end_column``
    must be ``m``. In subsequence mode backtracking starts at
    ``(n, end_column)`` and stops on first reaching row 1; the column
    reached there is the matched window start.
    """
    n, m = matrix.n, matrix.m
    if end_column is None:
        end_column = m
    if not (1 <= end_column <= m):
        raise BoundsError(f"end column {end_column} out of range 1..{m}")
    if matrix.mode is Mode.GLOBAL and end_column != m:
        raise ValueError("global-mode paths must end at the last column")

    acc = matrix.entries
    i, j = n, end_column
    steps = [(i, j)]
    while True:
        if matrix.mode is Mode.SUBSEQUENCE and i == 1:
            break
        if i == 1 and j == 1:
            break
        if i == 1:
            j -= 1
        elif j == 1:
            i -= 1
        else:
            diag = acc[i - 1, j - 1]
            up = acc[i - 1, j]
            left = acc[i, j - 1]
            if diag <= up and diag <= left:
                i -= 1
                j -= 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        steps.append((i, j))
    steps.reverse()
    return WarpingPath(np.asarray(steps, dtype=np.int64))


def path_cost(x: TimeSeries, y: TimeSeries, path: WarpingPath) -> float:
    """Total cost of one alignment: the sum of local costs along the path."""
    _check_channels(x, y)
    steps = path.steps
    if steps[:, 0].min() < 1 or steps[:, 0].max() > len(x):
        raise BoundsError("path row index outside the pattern")
    if steps[:, 1].min() < 1 or steps[:, 1].max() > len(y):
        raise BoundsError("path column index outside the stream")
    xs = x.samples[steps[:, 0] - 1]
    ys = y.samples[steps[:, 1] - 1]
    counters.add_cost(steps.shape[0])
    return float(np.sqrt(((xs - ys) ** 2).sum(axis=1)).sum())

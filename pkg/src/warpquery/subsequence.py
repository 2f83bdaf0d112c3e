"""Subsequence queries: best-window location and repetition search.

A pattern x is located inside a much longer stream y by accumulating the
cost matrix in subsequence mode, reading its last row as the matching
profile (best cost of any alignment ending at each stream position), and
backtracking from the minimizing end position to recover the window
start.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dtw import CostMatrix, Mode, WarpingPath, accumulate_cost, best_path
from .series import TimeSeries


@dataclass(frozen=True)
class Match:
    """One located window: 1-based inclusive bounds, its distance, its path.

    ``path`` is the alignment restricted to the window (its first step
    sits on pattern row 1 at column ``start``). Matches produced by the
    kernel surrogate carry no alignment and have ``path=None``.
    """

    start: int
    end: int
    distance: float
    path: WarpingPath | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.start <= self.end):
            raise ValueError(f"invalid window [{self.start}:{self.end}]")


class MatchingProfile:
    """Per-end-position best alignment cost, with an exclusion mask.

    ``values[b-1]`` is the cheapest cost of aligning the whole pattern to
    some window of the stream ending at position b. Excluded positions
    read as ``+inf`` during minimization.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64).copy()
        values.setflags(write=False)
        self.values = values
        self.excluded = np.zeros(values.shape[0], dtype=bool)

    def __len__(self) -> int:
        return self.values.shape[0]

    def masked_values(self) -> np.ndarray:
        out = self.values.copy()
        out[self.excluded] = np.inf
        return out

    def argmin(self) -> int:
        """Smallest 1-based position minimizing the masked profile."""
        return int(np.argmin(self.masked_values())) + 1

    def exclude_around(self, position: int, radius: int) -> None:
        lo = max(position - radius, 1)
        hi = min(position + radius, len(self))
        self.excluded[lo - 1 : hi] = True


def matching_profile(x: TimeSeries, y: TimeSeries) -> MatchingProfile:
    """Best alignment cost of ``x`` against windows ending at each position of ``y``."""
    matrix = accumulate_cost(x, y, mode=Mode.SUBSEQUENCE)
    return MatchingProfile(matrix.last_row())


def _match_at(matrix: CostMatrix, end: int) -> Match:
    path = best_path(matrix, end_column=end)
    start = int(path.steps[0, 1])
    distance = float(matrix.entries[matrix.n, end])
    return Match(start=start, end=end, distance=distance, path=path)


def best_match(x: TimeSeries, y: TimeSeries) -> Match:
    """The single best-fitting window of ``y`` for the pattern ``x``.

    The end position is the smallest index minimizing the matching
    profile; the start position comes from backtracking.
    """
    matrix = accumulate_cost(x, y, mode=Mode.SUBSEQUENCE)
    end = int(np.argmin(matrix.last_row())) + 1
    return _match_at(matrix, end)


def find_repetitions(
    x: TimeSeries,
    y: TimeSeries,
    threshold: float,
    exclusion_radius: int | None = None,
) -> list[Match]:
    """All repetitions of ``x`` inside ``y`` scoring no worse than ``threshold``.

    The matrix is accumulated once. Each round takes the global minimizer
    of the masked profile, stops as soon as it exceeds the threshold,
    backtracks the window, and masks end positions within
    ``exclusion_radius`` of the hit so the same repetition is not
    reported twice. The default radius, half the pattern length, also
    suppresses the degenerate near-singleton windows that cluster around
    a hit. Matches come back in discovery order, which is non-decreasing
    in distance.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    if exclusion_radius is None:
        exclusion_radius = math.ceil(len(x) / 2)
    if exclusion_radius < 1:
        raise ValueError(f"exclusion radius must be >= 1, got {exclusion_radius}")

    matrix = accumulate_cost(x, y, mode=Mode.SUBSEQUENCE)
    profile = MatchingProfile(matrix.last_row())
    matches: list[Match] = []
    while not profile.excluded.all():
        masked = profile.masked_values()
        end = int(np.argmin(masked)) + 1
        if masked[end - 1] > threshold:
            break
        matches.append(_match_at(matrix, end))
        profile.exclude_around(end, exclusion_radius)
    return matches

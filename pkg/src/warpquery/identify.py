"""User identification: streams-by-patterns distance matrix and accuracy.

Every stream contributes a fixed-length reference window (its walking
"signature"); each pattern is then located inside every stream either by
exact subsequence alignment or by the kernel surrogate with the window
optimizer. Row-wise argmin over the resulting matrix predicts which
pattern each stream belongs to.
"""

from __future__ import annotations

import dataclasses
import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bayesopt import OptimizerConfig, SearchSpace, optimize_match
from .exceptions import BoundsError, DimensionError, NotCalibratedError
from .kernel import KernelModel
from .series import TimeSeries
from .subsequence import Match, best_match

DEFAULT_WINDOW = 200


class Method(enum.Enum):
    EXACT_DTW = "dtw"
    KERNEL = "kernel"


@dataclass(frozen=True)
class IdentificationMatrix:
    """Distances of every (stream row, pattern column) pair plus predictions.

    ``predictions[r]`` is the smallest 1-based column index attaining the
    row minimum.
    """

    distances: np.ndarray
    method: Method
    predictions: np.ndarray
    matches: tuple[tuple[Match, ...], ...]
    stream_labels: tuple[str, ...]
    pattern_labels: tuple[str, ...]

    @property
    def n_streams(self) -> int:
        return self.distances.shape[0]

    @property
    def n_patterns(self) -> int:
        return self.distances.shape[1]


def default_window_start(stream: TimeSeries, window: int = DEFAULT_WINDOW) -> int:
    """Default reference-window offset: the first full window.

    Ingestion is fail-fast, so every loaded stream is gap-free and the
    earliest window is always usable; per-stream offsets can still be
    supplied explicitly where a better signature is known.
    """
    if window > stream.n_samples:
        raise BoundsError(
            f"window of {window} samples exceeds stream of {stream.n_samples}"
        )
    return 1


def extract_reference(
    stream: TimeSeries, start: int | None = None, window: int = DEFAULT_WINDOW
) -> TimeSeries:
    """Cut the reference pattern of ``window`` samples starting at ``start``."""
    if start is None:
        start = default_window_start(stream, window)
    if start < 1 or start + window - 1 > stream.n_samples:
        raise BoundsError(
            f"window [{start}:{start + window - 1}] exceeds stream of {stream.n_samples} samples"
        )
    return stream.slice(start, start + window - 1)


def row_predictions(distances: np.ndarray) -> np.ndarray:
    """Per-row smallest minimizing column, 1-based."""
    return np.argmin(distances, axis=1) + 1


def _cell_seed(base_seed: int, row: int, col: int) -> int:
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(row, col))
    return int(seq.generate_state(1)[0])


def build_identification_matrix(
    patterns: list[TimeSeries] | tuple[TimeSeries, ...],
    streams: list[TimeSeries] | tuple[TimeSeries, ...],
    method: Method,
    model: KernelModel | None = None,
    length_tolerance: float = 0.5,
    config: OptimizerConfig = OptimizerConfig(),
    n_jobs: int = 1,
) -> IdentificationMatrix:
    """Score every pattern against every stream.

    Exact mode takes the best subsequence alignment distance and needs no
    model. Kernel mode runs the window optimizer per cell with a seed
    derived from (config seed, row, column), so the matrix does not
    depend on how cells are scheduled.
    """
    if not patterns or not streams:
        raise ValueError("need at least one pattern and one stream")
    d = patterns[0].n_channels
    for s in list(patterns) + list(streams):
        if s.n_channels != d:
            raise DimensionError("patterns and streams must share the channel count")
    if method is Method.KERNEL:
        if model is None:
            raise NotCalibratedError("kernel identification requires a calibrated model")
        if model.n_patterns != len(patterns):
            raise NotCalibratedError(
                f"model calibrated for {model.n_patterns} patterns, got {len(patterns)}"
            )

    n_rows, n_cols = len(streams), len(patterns)

    def cell(row: int, col: int) -> Match:
        if method is Method.EXACT_DTW:
            return best_match(patterns[col], streams[row])
        space = SearchSpace(
            n_ref=len(patterns[col]),
            m_stream=len(streams[row]),
            length_tolerance=length_tolerance,
        )
        cell_config = dataclasses.replace(config, seed=_cell_seed(config.seed, row, col))
        return optimize_match(
            patterns[col], streams[row], model, col, space, cell_config
        )

    jobs = [(r, c) for r in range(n_rows) for c in range(n_cols)]
    matches_grid: list[list[Match | None]] = [[None] * n_cols for _ in range(n_rows)]
    if n_jobs <= 1:
        for r, c in jobs:
            matches_grid[r][c] = cell(r, c)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for (r, c), match in zip(jobs, pool.map(lambda rc: cell(*rc), jobs)):
                matches_grid[r][c] = match

    distances = np.array(
        [[matches_grid[r][c].distance for c in range(n_cols)] for r in range(n_rows)]
    )
    distances.setflags(write=False)
    return IdentificationMatrix(
        distances=distances,
        method=method,
        predictions=row_predictions(distances),
        matches=tuple(tuple(row) for row in matches_grid),
        stream_labels=tuple(s.label or f"stream-{i + 1}" for i, s in enumerate(streams)),
        pattern_labels=tuple(p.label or f"pattern-{i + 1}" for i, p in enumerate(patterns)),
    )


def accuracy(matrix: IdentificationMatrix, truth) -> tuple[int, int, float]:
    """Count rows whose predicted column matches the true one."""
    truth = np.asarray(truth, dtype=np.int64)
    if truth.shape != (matrix.n_streams,):
        raise DimensionError(
            f"need one true column per stream row, got {truth.shape} for {matrix.n_streams} rows"
        )
    correct = int(np.sum(matrix.predictions == truth))
    return correct, matrix.n_streams, correct / matrix.n_streams


def write_matrix_csv(matrix: IdentificationMatrix, path) -> None:
    """Distance table: header of pattern labels, leading column of stream labels."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("stream," + ",".join(matrix.pattern_labels) + "\n")
        for r in range(matrix.n_streams):
            row = ",".join(repr(float(v)) for v in matrix.distances[r])
            fh.write(f"{matrix.stream_labels[r]},{row}\n")


def write_heatmap_pgm(matrix: IdentificationMatrix, path) -> None:
    """8-bit graymap of the matrix, one pixel per cell, brighter = closer.

    Each row is min-max normalized on its own so the per-stream ranking
    is what shows; a constant row renders fully bright.
    """
    dist = matrix.distances
    lo = dist.min(axis=1, keepdims=True)
    span = dist.max(axis=1, keepdims=True) - lo
    span = np.where(span > 0.0, span, 1.0)
    normalized = (dist - lo) / span
    pixels = np.rint(255.0 * (1.0 - normalized)).astype(np.uint8)
    with open(Path(path), "wb") as fh:
        fh.write(f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())

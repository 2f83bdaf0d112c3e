"""Series containers, the local cost function, and data-file ingestion.

Index convention: every public index in this package is 1-based and
inclusive, matching the usual alignment notation; arrays are of course
0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .exceptions import BoundsError, DimensionError, ParseError


@dataclass(frozen=True)
class TimeSeries:
    """A real-valued multivariate series stored channels-by-samples.

    ``values`` has shape (d, T). Timestamps, when present, are carried
    through slicing and file round-trips but play no role in any
    alignment computation (series are treated as uniformly sampled).
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    label: str | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if values.ndim != 2:
            raise ValueError(f"values must be 1-D or 2-D, got ndim={values.ndim}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"series needs at least one channel and one sample, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("series values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=np.float64)
            if ts.ndim != 1 or ts.shape[0] != values.shape[1]:
                raise ValueError("timestamps must be a 1-D sequence with one entry per sample")
            if np.any(np.diff(ts) < 0):
                raise ValueError("timestamps must be non-decreasing")
            ts = ts.copy()
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)

    @property
    def n_channels(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.n_samples

    @cached_property
    def samples(self) -> np.ndarray:
        """Sample-major (T, d) contiguous view used by the numeric kernels."""
        arr = np.ascontiguousarray(self.values.T)
        arr.setflags(write=False)
        return arr

    def slice(self, a: int, b: int) -> "TimeSeries":
        """Subsequence from sample ``a`` to sample ``b``, 1-based inclusive."""
        if not (1 <= a <= b <= self.n_samples):
            raise BoundsError(
                f"slice [{a}:{b}] out of range for series of length {self.n_samples}"
            )
        ts = None if self.timestamps is None else self.timestamps[a - 1 : b].copy()
        return TimeSeries(self.values[:, a - 1 : b].copy(), timestamps=ts, label=self.label)

    def value_equal(self, other: "TimeSeries") -> bool:
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )


def euclidean_cost(x, y) -> float:
    """Euclidean distance between two d-dimensional samples."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionError(f"sample lengths differ: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[0] < 1:
        raise DimensionError("samples must have at least one component")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def znormalize(series: TimeSeries) -> TimeSeries:
    """Per-channel z-normalization; constant channels are only centered."""
    mean = series.values.mean(axis=1, keepdims=True)
    std = series.values.std(axis=1, keepdims=True)
    std = np.where(std > 0.0, std, 1.0)
    return TimeSeries((series.values - mean) / std, timestamps=series.timestamps, label=series.label)


def load_series_file(path, n_channels: int | None = None) -> TimeSeries:
    """Load a plain-text series file: one sample per line, ``time,v1,...,vd``.

    When ``n_channels`` is given every row must carry exactly that many
    value fields; otherwise the first non-empty line fixes the count.
    Blank lines are skipped; any malformed row aborts the load with its
    line number.
    """
    path = Path(path)
    times: list[float] = []
    rows: list[list[float]] = []
    width = 0 if n_channels is None else n_channels + 1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width == 0:
                if len(fields) < 2:
                    raise ParseError(
                        f"{path}:{lineno}: expected at least 2 comma-separated fields, got {len(fields)}"
                    )
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(
                    f"{path}:{lineno}: expected {width} comma-separated fields, got {len(fields)}"
                )
            try:
                numbers = [float(f) for f in fields]
            except ValueError:
                raise ParseError(f"{path}:{lineno}: non-numeric field in {line!r}") from None
            if not all(np.isfinite(numbers)):
                raise ParseError(f"{path}:{lineno}: non-finite value in {line!r}")
            times.append(numbers[0])
            rows.append(numbers[1:])
    if not rows:
        raise ParseError(f"{path}: no samples found")
    values = np.asarray(rows, dtype=np.float64).T
    return TimeSeries(values, timestamps=np.asarray(times), label=path.stem)


def load_uci_file(path) -> TimeSeries:
    """Load a walking-activity recording: rows of ``time,ax,ay,az``."""
    return load_series_file(path, n_channels=3)


def save_series_file(series: TimeSeries, path) -> None:
    """Write a series in the row format accepted by :func:`load_series_file`."""
    path = Path(path)
    ts = series.timestamps
    if ts is None:
        ts = np.arange(series.n_samples, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for t in range(series.n_samples):
            fields = [repr(float(ts[t]))] + [repr(float(v)) for v in series.values[:, t]]
            fh.write(",".join(fields) + "\n")


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of streams sharing one channel count."""

    streams: tuple[TimeSeries, ...]
    source_paths: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.streams:
            raise ValueError("dataset must contain at least one stream")
        if len(self.streams) != len(self.source_paths):
            raise ValueError("one source path per stream required")
        d = self.streams[0].n_channels
        for s in self.streams:
            if s.n_channels != d:
                raise DimensionError(
                    f"all streams must share the channel count; got {s.n_channels} and {d}"
                )

    def __len__(self) -> int:
        return len(self.streams)

    @property
    def n_channels(self) -> int:
        return self.streams[0].n_channels

    @classmethod
    def from_dir(cls, directory) -> "Dataset":
        """Load every ``*.csv`` file in a directory, one stream per file.

        Files with purely numeric stems sort numerically (1.csv before
        10.csv), anything else lexicographically.
        """
        directory = Path(directory)
        files = sorted(directory.glob("*.csv"), key=_stem_sort_key)
        if not files:
            raise FileNotFoundError(f"no .csv stream files in {directory}")
        streams = tuple(load_series_file(f) for f in files)
        return cls(streams=streams, source_paths=tuple(str(f) for f in files))


def _stem_sort_key(path: Path):
    stem = path.stem
    return (0, int(stem), "") if stem.isdigit() else (1, 0, stem)

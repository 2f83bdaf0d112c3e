"""Random-basis feature embedding.

Any series, whatever its length, is represented as the vector of its
alignment distances to a fixed set of short random series. Two series of
different lengths then become comparable by an ordinary vector kernel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dtw import dtw_distance
from .exceptions import DimensionError, ParseError
from .series import TimeSeries


@dataclass(frozen=True)
class BasisSet:
    """A reproducible collection of short random reference series.

    Regenerating with the same parameters and seed yields bit-identical
    values: series i is drawn from its own RNG substream, spawned from
    the master seed with spawn key i, so the set does not depend on
    generation order or worker count.
    """

    series: tuple[TimeSeries, ...]
    seed: int
    sigma2: float
    length_min: int
    length_max: int

    def __post_init__(self) -> None:
        if not self.series:
            raise ValueError("basis set must contain at least one series")
        d = self.series[0].n_channels
        for s in self.series:
            if s.n_channels != d:
                raise DimensionError("all basis series must share the channel count")
            if not (self.length_min <= len(s) <= self.length_max):
                raise ValueError(
                    f"basis length {len(s)} outside [{self.length_min}, {self.length_max}]"
                )

    @property
    def size(self) -> int:
        return len(self.series)

    @property
    def n_channels(self) -> int:
        return self.series[0].n_channels


def generate_basis(
    size: int,
    n_channels: int,
    length_min: int,
    length_max: int,
    sigma2: float,
    seed: int,
) -> BasisSet:
    """Draw ``size`` random series with lengths uniform in the given range.

    Values are i.i.d. normal with mean 0 and variance ``sigma2`` (so the
    draws use standard deviation ``sqrt(sigma2)``), independently across
    channels.
    """
    if size < 1:
        raise ValueError(f"basis size must be >= 1, got {size}")
    if n_channels < 1:
        raise ValueError(f"channel count must be >= 1, got {n_channels}")
    if not (1 <= length_min <= length_max):
        raise ValueError(f"need 1 <= length_min <= length_max, got {length_min}..{length_max}")
    if sigma2 <= 0:
        raise ValueError(f"variance must be > 0, got {sigma2}")
    std = math.sqrt(sigma2)
    children = np.random.SeedSequence(seed).spawn(size)
    series = []
    for i in range(size):
        rng = np.random.default_rng(children[i])
        length = int(rng.integers(length_min, length_max + 1))
        values = rng.normal(0.0, std, size=(n_channels, length))
        series.append(TimeSeries(values, label=f"basis-{i}"))
    return BasisSet(
        series=tuple(series),
        seed=seed,
        sigma2=float(sigma2),
        length_min=length_min,
        length_max=length_max,
    )


def feature_map(x: TimeSeries, basis: BasisSet, n_jobs: int = 1) -> np.ndarray:
    """Embed ``x`` as its alignment distance to every basis series.

    Components are independent, so they may be computed by any number of
    workers; results are placed by component index and do not depend on
    the fan-out.
    """
    if x.n_channels != basis.n_channels:
        raise DimensionError(
            f"channel counts differ: series {x.n_channels} vs basis {basis.n_channels}"
        )
    out = np.empty(basis.size, dtype=np.float64)
    if n_jobs <= 1:
        for i, s in enumerate(basis.series):
            out[i] = dtw_distance(x, s)
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            for i, value in enumerate(pool.map(lambda s: dtw_distance(x, s), basis.series)):
                out[i] = value
    return out


def save_basis(basis: BasisSet, path) -> None:
    """Persist a basis set as text; reloading reproduces embeddings bit-exactly.

    Format: a header line ``R d l_min l_max sigma2 seed`` followed, per
    series, by a line ``i L_i`` and then ``L_i`` lines of ``d``
    comma-separated values.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"{basis.size} {basis.n_channels} {basis.length_min} "
            f"{basis.length_max} {repr(basis.sigma2)} {basis.seed}\n"
        )
        for i, s in enumerate(basis.series):
            fh.write(f"{i} {len(s)}\n")
            for t in range(len(s)):
                fh.write(",".join(repr(float(v)) for v in s.values[:, t]) + "\n")


def load_basis(path) -> BasisSet:
    """Read back a basis set written by :func:`save_basis`."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 6:
            raise ParseError(f"{path}:1: malformed basis header")
        size, d, length_min, length_max = (int(v) for v in header[:4])
        sigma2 = float(header[4])
        seed = int(header[5])
        series = []
        for i in range(size):
            index_line = fh.readline().split()
            if len(index_line) != 2 or int(index_line[0]) != i:
                raise ParseError(f"{path}: malformed series header for basis {i}")
            length = int(index_line[1])
            values = np.empty((d, length), dtype=np.float64)
            for t in range(length):
                fields = fh.readline().strip().split(",")
                if len(fields) != d:
                    raise ParseError(f"{path}: basis {i} sample {t + 1} has {len(fields)} values, expected {d}")
                values[:, t] = [float(f) for f in fields]
            series.append(TimeSeries(values, label=f"basis-{i}"))
    return BasisSet(
        series=tuple(series),
        seed=seed,
        sigma2=sigma2,
        length_min=length_min,
        length_max=length_max,
    )

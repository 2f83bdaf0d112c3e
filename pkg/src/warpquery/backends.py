"""Hot numeric kernels with two interchangeable implementations.

The dynamic-programming sweep over the accumulated cost matrix dominates
runtime, so it is compiled with numba when available. A pure-numpy
fallback (vectorized local costs, Python sweep) covers environments
without a working JIT; set ``WARPQUERY_NUMBA=0`` to force it. Both
implementations stay importable so ``benchmarks/backend_bench.py`` can
compare them inside one process.

Kernels take sample-major float64 arrays of shape (T, d). ``band_width``
is the Sakoe-Chiba half-width in cells after rescaling the diagonal to
the grid aspect (``inf`` disables the band): cell (i, j) is admissible
iff ``|i - j * N/M| <= band_width``. With ``free_start`` the whole
sentinel row 0 is zero, which makes row 1 equal the plain local cost of
the first pattern sample against every stream sample, i.e. the
subsequence-mode initialization.
"""

from __future__ import annotations

import os

import numpy as np


def _accumulate_numpy(x, y, free_start, band_width):
    n, m = x.shape[0], y.shape[0]
    diff = x[:, None, :] - y[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    if free_start:
        acc[0, :] = 0.0
    ratio = n / m
    banded = np.isfinite(band_width)
    for i in range(1, n + 1):
        row = acc[i]
        above = acc[i - 1]
        ci = cost[i - 1]
        for j in range(1, m + 1):
            if banded and abs(i - j * ratio) > band_width:
                continue
            best = above[j - 1]
            if above[j] < best:
                best = above[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = best + ci[j - 1]
    return acc


def _accumulate_scalar(x, y, free_start, band_width):
    n = x.shape[0]
    m = y.shape[0]
    d = x.shape[1]
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    if free_start:
        for j in range(m + 1):
            acc[0, j] = 0.0
    ratio = n / m
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if abs(i - j * ratio) > band_width:
                continue
            s = 0.0
            for k in range(d):
                delta = x[i - 1, k] - y[j - 1, k]
                s += delta * delta
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = best + np.sqrt(s)
    return acc


def _pairwise_numpy(x, y, band_width):
    # Distance-only path; the fallback trades the rolling buffer for code reuse.
    return _accumulate_numpy(x, y, False, band_width)[x.shape[0], y.shape[0]]


def _pairwise_scalar(x, y, band_width):
    n = x.shape[0]
    m = y.shape[0]
    d = x.shape[1]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    ratio = n / m
    for i in range(1, n + 1):
        for j in range(m + 1):
            cur[j] = np.inf
        for j in range(1, m + 1):
            if abs(i - j * ratio) > band_width:
                continue
            s = 0.0
            for k in range(d):
                delta = x[i - 1, k] - y[j - 1, k]
                s += delta * delta
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = best + np.sqrt(s)
        prev, cur = cur, prev
    return prev[m]


_flag = os.environ.get("WARPQUERY_NUMBA", "1").strip().lower()
_numba_requested = _flag not in {"0", "false", "off", "no"}
_numba_active = False

if _numba_requested:
    try:
        from numba import njit
    except ImportError:
        pass
    else:
        _accumulate_jit = njit(cache=True, nogil=True)(_accumulate_scalar)
        _pairwise_jit = njit(cache=True, nogil=True)(_pairwise_scalar)
        _numba_active = True

if _numba_active:
    accumulate = _accumulate_jit
    pairwise_distance = _pairwise_jit
else:
    accumulate = _accumulate_numpy
    pairwise_distance = _pairwise_numpy


def active_backend() -> str:
    """Name of the kernel implementation selected at import: numba or numpy."""
    return "numba" if _numba_active else "numpy"


def band_cell_count(n: int, m: int, band_width: float) -> int:
    """Number of DP cells inside the band, i.e. cost evaluations per sweep."""
    if not np.isfinite(band_width):
        return n * m
    j = np.arange(1, m + 1, dtype=np.float64)
    ratio = n / m
    lo = np.maximum(np.ceil(j * ratio - band_width), 1.0)
    hi = np.minimum(np.floor(j * ratio + band_width), float(n))
    return int(np.maximum(hi - lo + 1.0, 0.0).sum())

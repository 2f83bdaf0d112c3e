"""Independent brute-force references for the alignment tests.

These deliberately avoid dynamic programming: every admissible warping
path is enumerated and its cost summed directly, so the reference shares
nothing with the implementation under test. Only usable for tiny grids
(path counts grow combinatorially).
"""

import numpy as np


def all_warping_paths(n, m):
    """Every admissible path of 1-based pairs from (1, 1) to (n, m)."""
    stack = [((1, 1),)]
    while stack:
        path = stack.pop()
        i, j = path[-1]
        if i == n and j == m:
            yield path
            continue
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            if i + di <= n and j + dj <= m:
                stack.append(path + ((i + di, j + dj),))


def brute_force_dtw(x, y):
    """Minimum path cost over the exhaustive path set; x, y are (T, d) arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    best = np.inf
    for path in all_warping_paths(x.shape[0], y.shape[0]):
        cost = 0.0
        for i, j in path:
            cost += float(np.linalg.norm(x[i - 1] - y[j - 1]))
        if cost < best:
            best = cost
    return best


def random_series_pair(rng, n_max=6, m_max=6, d_max=2, lo=-2.0, hi=2.0):
    """A random (x, y) pair of sample-major arrays sharing a channel count."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    d = int(rng.integers(1, d_max + 1))
    x = rng.uniform(lo, hi, size=(n, d))
    y = rng.uniform(lo, hi, size=(m, d))
    return x, y

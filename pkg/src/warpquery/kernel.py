"""RBF kernel distance on embeddings and its per-pattern calibration.

The surrogate distance between two series is ``1 - k(u, v)`` where u, v
are their basis embeddings and k is a squared-exponential kernel with a
per-pattern length scale. Length scales are calibrated so the surrogate
tracks the exact alignment distances between the reference patterns,
after those have been min-max rescaled into [0, 1] to share the kernel's
range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dtw import dtw_distance
from .embedding import BasisSet, feature_map, load_basis
from .exceptions import DimensionError, ParseError
from .instrumentation import counters
from .series import TimeSeries

DEFAULT_GAMMA = 1.0
GAMMA_GRID_LO = 1e-3
GAMMA_GRID_HI = 1e3
GAMMA_GRID_POINTS = 60


def rbf_kernel(u: np.ndarray, v: np.ndarray, gamma: float) -> float:
    """Squared-exponential similarity ``exp(-||u - v||^2 / (2 gamma^2))``."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionError(f"embedding lengths differ: {u.shape} vs {v.shape}")
    if gamma <= 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    sq = float(np.sum((u - v) ** 2))
    # ~3R flops for the squared norm plus a handful for the exponential.
    counters.add_kernel_ops(3 * u.size + 5)
    return math.exp(-sq / (2.0 * gamma * gamma))


def kernel_distance(u: np.ndarray, v: np.ndarray, gamma: float) -> float:
    """Surrogate distance ``1 - rbf_kernel(u, v, gamma)``, in [0, 1]."""
    return 1.0 - rbf_kernel(u, v, gamma)


def minmax_normalize(matrix: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Rescale a symmetric zero-diagonal distance matrix into [0, 1].

    Returns the rescaled matrix together with the (min, max) constants so
    later distances can be mapped consistently. A constant matrix maps to
    all zeros.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("distance matrix must be finite")
    if not np.allclose(matrix, matrix.T, atol=1e-9):
        raise ValueError("distance matrix must be symmetric")
    lo = float(matrix.min())
    hi = float(matrix.max())
    if hi == lo:
        return np.zeros_like(matrix), lo, hi
    return (matrix - lo) / (hi - lo), lo, hi


@dataclass(frozen=True)
class KernelModel:
    """Calibrated surrogate: basis, per-pattern length scales, rescaling constants."""

    basis: BasisSet
    gammas: np.ndarray
    dtw_min: float
    dtw_max: float
    pattern_embeddings: np.ndarray

    def __post_init__(self) -> None:
        gammas = np.asarray(self.gammas, dtype=np.float64)
        if np.any(gammas <= 0):
            raise ValueError("all length scales must be > 0")
        if self.dtw_min > self.dtw_max:
            raise ValueError("dtw_min must not exceed dtw_max")
        emb = np.asarray(self.pattern_embeddings, dtype=np.float64)
        if emb.ndim != 2 or emb.shape[0] != gammas.shape[0] or emb.shape[1] != self.basis.size:
            raise DimensionError("need one embedding row of basis size per pattern")
        gammas.setflags(write=False)
        emb.setflags(write=False)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "pattern_embeddings", emb)

    @property
    def n_patterns(self) -> int:
        return self.gammas.shape[0]


def pairwise_error(
    embeddings: np.ndarray, gammas: np.ndarray, target: np.ndarray
) -> float:
    """Mean absolute gap between surrogate and target distances over i<j pairs.

    Pair (i, j) is scored with pattern i's length scale, matching how the
    calibrated model is used afterwards.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    gammas = np.asarray(gammas, dtype=np.float64)
    n = embeddings.shape[0]
    if n < 2:
        raise ValueError("pair error needs at least two patterns")
    total = 0.0
    for i in range(n - 1):
        sq = np.sum((embeddings[i + 1 :] - embeddings[i]) ** 2, axis=1)
        surrogate = 1.0 - np.exp(-sq / (2.0 * gammas[i] ** 2))
        total += float(np.abs(surrogate - target[i, i + 1 :]).sum())
    return 2.0 * total / (n * (n - 1))


def _partial_error(sqdists: np.ndarray, targets: np.ndarray, gamma: float) -> float:
    surrogate = 1.0 - np.exp(-sqdists / (2.0 * gamma * gamma))
    return float(np.abs(surrogate - targets).sum())


def _golden_section(fun, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = fun(d)
    return (c, fc) if fc <= fd else (d, fd)


def fit_lengthscale(
    sqdists: np.ndarray,
    targets: np.ndarray,
    default: float = DEFAULT_GAMMA,
) -> tuple[float, float]:
    """Minimize the absolute surrogate error for one pattern's length scale.

    ``sqdists`` holds the squared embedding distances to the later
    patterns and ``targets`` their rescaled exact distances. The search
    is a log-scale grid over [1e-3, 1e3] refined by golden section around
    the best bracket; the default is kept unless strictly improved upon.
    """
    sqdists = np.asarray(sqdists, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    best_gamma = float(default)
    best_err = _partial_error(sqdists, targets, best_gamma)
    if best_err == 0.0:
        return best_gamma, best_err

    log_grid = np.linspace(math.log10(GAMMA_GRID_LO), math.log10(GAMMA_GRID_HI), GAMMA_GRID_POINTS)
    errs = np.array([_partial_error(sqdists, targets, 10.0**g) for g in log_grid])
    k = int(np.argmin(errs))
    if errs[k] < best_err:
        best_gamma, best_err = float(10.0 ** log_grid[k]), float(errs[k])

    lo = log_grid[max(k - 1, 0)]
    hi = log_grid[min(k + 1, log_grid.size - 1)]
    log_opt, err_opt = _golden_section(
        lambda g: _partial_error(sqdists, targets, 10.0**g), lo, hi
    )
    if err_opt < best_err:
        best_gamma, best_err = float(10.0**log_opt), float(err_opt)
    return best_gamma, best_err


def fit_kernel_model(
    patterns: list[TimeSeries] | tuple[TimeSeries, ...],
    basis: BasisSet,
    default_gamma: float = DEFAULT_GAMMA,
    n_jobs: int = 1,
) -> KernelModel:
    """Calibrate one length scale per reference pattern.

    The error of pair (i, j), i < j, depends only on pattern i's length
    scale, so each coordinate is minimized on its own partial sum. The
    last pattern, unconstrained by any pair, gets the geometric mean of
    the fitted scales.
    """
    n = len(patterns)
    if n < 2:
        raise ValueError(f"calibration needs at least 2 patterns, got {n}")
    embeddings = np.stack([feature_map(p, basis, n_jobs=n_jobs) for p in patterns])

    exact = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            exact[i, j] = exact[j, i] = dtw_distance(patterns[i], patterns[j])
    target, dtw_min, dtw_max = minmax_normalize(exact)

    gammas = np.empty(n)
    for i in range(n - 1):
        sq = np.sum((embeddings[i + 1 :] - embeddings[i]) ** 2, axis=1)
        gammas[i], _ = fit_lengthscale(sq, target[i, i + 1 :], default=default_gamma)
    gammas[n - 1] = float(np.exp(np.mean(np.log(gammas[: n - 1]))))

    return KernelModel(
        basis=basis,
        gammas=gammas,
        dtw_min=dtw_min,
        dtw_max=dtw_max,
        pattern_embeddings=embeddings,
    )


def save_model(model: KernelModel, path, basis_path) -> None:
    """Persist a calibrated model; the basis set is stored by reference.

    ``basis_path`` should already contain the model's basis (see
    :func:`warpquery.embedding.save_basis`); a relative path is resolved
    against the model file's directory on load.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.n_patterns} {model.basis.size} {repr(model.dtw_min)} {repr(model.dtw_max)}\n")
        fh.write(f"basis {basis_path}\n")
        fh.write("gammas " + " ".join(repr(float(g)) for g in model.gammas) + "\n")
        for i in range(model.n_patterns):
            row = ",".join(repr(float(v)) for v in model.pattern_embeddings[i])
            fh.write(f"embedding {i} {row}\n")


def load_model(path) -> KernelModel:
    """Read back a model written by :func:`save_model`."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ParseError(f"{path}:1: malformed model header")
        n, size = int(header[0]), int(header[1])
        dtw_min, dtw_max = float(header[2]), float(header[3])
        basis_line = fh.readline().split(maxsplit=1)
        if len(basis_line) != 2 or basis_line[0] != "basis":
            raise ParseError(f"{path}:2: expected a basis reference")
        basis_file = Path(basis_line[1].strip())
        if not basis_file.is_absolute():
            basis_file = path.parent / basis_file
        basis = load_basis(basis_file)
        if basis.size != size:
            raise ParseError(f"{path}: basis size {basis.size} does not match header {size}")
        gamma_line = fh.readline().split()
        if not gamma_line or gamma_line[0] != "gammas" or len(gamma_line) != n + 1:
            raise ParseError(f"{path}:3: expected {n} length scales")
        gammas = np.array([float(g) for g in gamma_line[1:]])
        embeddings = np.empty((n, size))
        for i in range(n):
            fields = fh.readline().split()
            if len(fields) != 3 or fields[0] != "embedding" or int(fields[1]) != i:
                raise ParseError(f"{path}: malformed embedding row {i}")
            embeddings[i] = [float(v) for v in fields[2].split(",")]
    return KernelModel(
        basis=basis,
        gammas=gammas,
        dtw_min=dtw_min,
        dtw_max=dtw_max,
        pattern_embeddings=embeddings,
    )

"""Sample-efficient search for the best-matching window under the surrogate.

Embedding every candidate window is expensive, so the surrogate distance
over (start, length) is treated as a black box: a Gaussian-process model
with a squared-exponential covariance is fit to the evaluations made so
far and expected improvement picks the next window. Small feasible sets
are simply enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, solve_triangular
from scipy.stats import norm

from .embedding import BasisSet, feature_map
from .exceptions import BoundsError, FeasibilityError
from .instrumentation import counters
from .kernel import KernelModel, kernel_distance
from .series import TimeSeries
from .subsequence import Match

GP_NOISE = 1e-6
GP_JITTER = 1e-8
GP_LENGTHSCALE_GRID = (0.05, 0.1, 0.2, 0.5, 1.0)
GP_REFIT_EVERY = 5


@dataclass(frozen=True)
class SearchSpace:
    """Feasible (start, length) windows for locating one pattern.

    A window is feasible when its length deviates from the pattern length
    by at most the given fraction and it fits inside the stream. The
    canonical enumeration order is length-ascending, then start-ascending.
    """

    n_ref: int
    m_stream: int
    length_tolerance: float
    length_lo: int = field(init=False)
    length_hi: int = field(init=False)

    def __post_init__(self) -> None:
        if self.n_ref < 1 or self.m_stream < 1:
            raise ValueError("pattern and stream must be non-empty")
        if not (0.0 <= self.length_tolerance < 1.0):
            raise ValueError(
                f"length tolerance must be in [0, 1), got {self.length_tolerance}"
            )
        # The 1e-9 slack keeps exact products like 0.5 * 200 from rounding
        # the wrong way.
        lo = max(1, math.ceil((1.0 - self.length_tolerance) * self.n_ref - 1e-9))
        hi = min(self.m_stream, math.floor((1.0 + self.length_tolerance) * self.n_ref + 1e-9))
        if lo > hi:
            raise FeasibilityError(
                f"no window length in [{lo}, {hi}] fits a stream of {self.m_stream} samples"
            )
        object.__setattr__(self, "length_lo", lo)
        object.__setattr__(self, "length_hi", hi)

    def lengths(self) -> np.ndarray:
        return np.arange(self.length_lo, self.length_hi + 1, dtype=np.int64)

    def _block_sizes(self) -> np.ndarray:
        return self.m_stream - self.lengths() + 1

    def size(self) -> int:
        return int(self._block_sizes().sum())

    def pairs_at(self, indices: np.ndarray) -> np.ndarray:
        """Map canonical-order indices to (start, length) pairs."""
        indices = np.asarray(indices, dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(self._block_sizes())))
        block = np.searchsorted(offsets, indices, side="right") - 1
        starts = indices - offsets[block] + 1
        lengths = self.length_lo + block
        return np.stack([starts, lengths], axis=1)

    def all_pairs(self) -> np.ndarray:
        return self.pairs_at(np.arange(self.size(), dtype=np.int64))

    def contains(self, start: int, length: int) -> bool:
        return (
            self.length_lo <= length <= self.length_hi
            and 1 <= start <= self.m_stream - length + 1
        )


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget and reproducibility knobs for the window optimizer.

    ``candidate_pool`` caps how many feasible points expected improvement
    scores per iteration; spaces at most that large are scored in full,
    larger ones are subsampled afresh each round from the seeded stream.
    """

    budget: int = 100
    init_design: int = 10
    seed: int = 0
    exhaustive_threshold: int = 500
    candidate_pool: int = 8192

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if not (0 < self.init_design < self.budget):
            raise ValueError(
                f"init design must be in 1..{self.budget - 1}, got {self.init_design}"
            )
        if self.exhaustive_threshold < 1:
            raise ValueError("exhaustive threshold must be >= 1")
        if self.candidate_pool < 1:
            raise ValueError("candidate pool must be >= 1")


def evaluate_objective(
    x_embedding: np.ndarray,
    y: TimeSeries,
    start: int,
    length: int,
    basis: BasisSet,
    gamma: float,
) -> float:
    """Surrogate distance between the pattern and one stream window."""
    if length < 1 or start < 1 or start + length - 1 > len(y):
        raise BoundsError(
            f"window start={start} length={length} outside stream of {len(y)} samples"
        )
    window = y.slice(start, start + length - 1)
    counters.add_objective()
    return kernel_distance(x_embedding, feature_map(window, basis), gamma)


class _Surrogate:
    """GP regressor with fixed unit signal variance and tiny observation noise.

    Inputs live in [0, 1]^2; the targets are standardized internally.
    Length scales are picked by marginal likelihood over a small grid,
    rechecked every few added observations; the covariance factorization
    retries with escalating jitter starting at 1e-8.
    """

    def __init__(self):
        self.lengthscales = np.array([0.2, 0.2])
        self._fits_since_search = 0

    @staticmethod
    def _kernel(a: np.ndarray, b: np.ndarray, ls: np.ndarray) -> np.ndarray:
        diff = (a[:, None, :] - b[None, :, :]) / ls
        return np.exp(-0.5 * np.einsum("ijk,ijk->ij", diff, diff))

    def _factorize(self, z: np.ndarray, yn: np.ndarray, ls: np.ndarray):
        cov = self._kernel(z, z, ls)
        cov[np.diag_indices_from(cov)] += GP_NOISE
        jitter = GP_JITTER
        while True:
            try:
                low = cho_factor(cov, lower=True)
                break
            except LinAlgError:
                cov[np.diag_indices_from(cov)] += jitter
                jitter *= 10.0
                if jitter > 1.0:
                    raise
        alpha = cho_solve(low, yn)
        return low, alpha

    def _log_marginal(self, low, alpha, yn) -> float:
        return float(
            -0.5 * yn @ alpha
            - np.log(np.diag(low[0])).sum()
            - 0.5 * yn.size * math.log(2.0 * math.pi)
        )

    def fit(self, z: np.ndarray, y: np.ndarray) -> None:
        self._z = z
        self._y_mean = float(y.mean())
        self._y_std = float(y.std()) or 1.0
        yn = (y - self._y_mean) / self._y_std
        if self._fits_since_search % GP_REFIT_EVERY == 0:
            best = -np.inf
            for ls0 in GP_LENGTHSCALE_GRID:
                for ls1 in GP_LENGTHSCALE_GRID:
                    ls = np.array([ls0, ls1])
                    low, alpha = self._factorize(z, yn, ls)
                    lml = self._log_marginal(low, alpha, yn)
                    if lml > best:
                        best = lml
                        self.lengthscales = ls
        self._fits_since_search += 1
        self._low, self._alpha = self._factorize(z, yn, self.lengthscales)

    def predict(self, zq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        kstar = self._kernel(self._z, zq, self.lengthscales)
        mu = kstar.T @ self._alpha
        v = solve_triangular(self._low[0], kstar, lower=True)
        var = np.clip(1.0 - np.einsum("ij,ij->j", v, v), 0.0, None)
        return mu * self._y_std + self._y_mean, np.sqrt(var) * self._y_std


def _expected_improvement(mu: np.ndarray, sd: np.ndarray, best: float) -> np.ndarray:
    improvement = best - mu
    out = np.maximum(improvement, 0.0)
    active = sd > 1e-12
    u = improvement[active] / sd[active]
    out[active] = improvement[active] * norm.cdf(u) + sd[active] * norm.pdf(u)
    return out


def optimize_match(
    x: TimeSeries,
    y: TimeSeries,
    model: KernelModel,
    pattern_index: int,
    space: SearchSpace,
    config: OptimizerConfig = OptimizerConfig(),
    trace=None,
) -> Match:
    """Locate the window of ``y`` minimizing the surrogate distance to ``x``.

    Feasible sets no larger than both the exhaustive threshold and the
    budget are enumerated outright, which returns the exact constrained
    optimum. Otherwise the run spends ``init_design`` seeded random
    evaluations and then proposes by expected improvement under the GP
    surrogate until exactly ``min(budget, feasible size)`` evaluations
    have been made. A proposal that repeats an evaluated point falls back
    to the nearest unevaluated candidate. ``trace`` may name a CSV file
    that receives one ``iter,a,b,distance,incumbent`` row per evaluation.
    """
    emb = model.pattern_embeddings[pattern_index]
    gamma = float(model.gammas[pattern_index])
    total = space.size()
    n_evals = min(config.budget, total)

    trace_rows: list[str] | None = [] if trace is not None else None
    best_val = math.inf
    best_pair = None

    def run(start: int, length: int) -> float:
        nonlocal best_val, best_pair
        value = evaluate_objective(emb, y, start, length, model.basis, gamma)
        if value < best_val:
            best_val = value
            best_pair = (start, length)
        if trace_rows is not None:
            trace_rows.append(
                f"{len(trace_rows) + 1},{start},{start + length - 1},{value!r},{best_val!r}"
            )
        return value

    if total <= config.exhaustive_threshold and config.budget >= total:
        for start, length in space.all_pairs():
            run(int(start), int(length))
    else:
        rng = np.random.default_rng(config.seed)
        scale_a = max(space.m_stream - 1, 1)
        scale_l = max(space.length_hi - space.length_lo, 1)

        evaluated_idx: list[int] = []
        evaluated_set: set[int] = set()
        values: list[float] = []

        def z_of(pairs: np.ndarray) -> np.ndarray:
            return np.stack(
                [
                    (pairs[:, 0] - 1) / scale_a,
                    (pairs[:, 1] - space.length_lo) / scale_l,
                ],
                axis=1,
            )

        def evaluate_index(idx: int) -> None:
            start, length = space.pairs_at(np.array([idx]))[0]
            values.append(run(int(start), int(length)))
            evaluated_idx.append(idx)
            evaluated_set.add(idx)

        n_init = min(config.init_design, n_evals)
        for idx in rng.choice(total, size=n_init, replace=False):
            evaluate_index(int(idx))

        surrogate = _Surrogate()
        while len(evaluated_idx) < n_evals:
            pool: np.ndarray
            if total <= config.candidate_pool:
                pool = np.arange(total, dtype=np.int64)
            else:
                pool = rng.choice(total, size=config.candidate_pool, replace=False)
            pool_pairs = space.pairs_at(pool)
            pool_z = z_of(pool_pairs)

            eval_pairs = space.pairs_at(np.array(evaluated_idx))
            surrogate.fit(z_of(eval_pairs), np.asarray(values))
            mu, sd = surrogate.predict(pool_z)
            choice = int(pool[np.argmax(_expected_improvement(mu, sd, min(values)))])

            if choice in evaluated_set:
                mask = np.array([idx not in evaluated_set for idx in pool])
                if not mask.any():
                    remaining = np.setdiff1d(
                        np.arange(total, dtype=np.int64), np.array(evaluated_idx)
                    )
                    choice = int(remaining[0])
                else:
                    chosen_z = z_of(space.pairs_at(np.array([choice])))[0]
                    dists = np.einsum("ij,ij->i", pool_z[mask] - chosen_z, pool_z[mask] - chosen_z)
                    choice = int(pool[mask][np.argmin(dists)])
            evaluate_index(choice)

    if trace_rows is not None:
        with open(Path(trace), "w", encoding="utf-8") as fh:
            fh.write("iter,a,b,distance,incumbent\n")
            fh.write("\n".join(trace_rows) + "\n")

    start, length = best_pair
    return Match(start=start, end=start + length - 1, distance=best_val, path=None)

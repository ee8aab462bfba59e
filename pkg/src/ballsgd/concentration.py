"""Monte-Carlo tail experiments for two martingale concentration bounds.

Both experiments simulate representative hard-case martingales and compare
empirical tail frequencies against the theoretical bound plus a Hoeffding
confidence half-width.  These are falsification tests for the probabilistic
machinery, not proofs: the bounds quantify over all generators, so we test
extremal-ish families (uniform-sphere increments for the vector bound,
symmetric two-point scalars for the scalar Bernstein bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .noise import NoiseSampler, hoeffding_half_width
from .rng import Rng

_MIN_TRIALS = 10_000
_TRIAL_CHUNK = 2048


@dataclass(frozen=True)
class TailReport:
    """Per-threshold empirical tail frequencies against theoretical bounds."""

    lambda_grid: tuple
    empirical_tail: tuple
    bound: tuple
    n_trials: int
    seed: int
    half_width: float

    @property
    def passed(self) -> bool:
        return all(e <= b + self.half_width
                   for e, b in zip(self.empirical_tail, self.bound))

    def to_dict(self) -> dict:
        return {"lambda_grid": list(self.lambda_grid),
                "empirical_tail": list(self.empirical_tail),
                "bound": list(self.bound),
                "n_trials": self.n_trials,
                "seed": self.seed,
                "half_width": self.half_width,
                "pass": self.passed}


def pinelis_tail_experiment(dim: int, K: int, step_bound: float,
                            lambda_grid, n_trials: int,
                            seed: int = 0) -> TailReport:
    """Tail of the norm of a sum of K independent uniform-sphere vectors of
    norm step_bound in R^dim, against the dimension-free bound
    4 exp(-lambda^2 / (4 K step_bound^2))."""
    if n_trials < _MIN_TRIALS:
        raise InvalidArgument("n_trials must be at least 10^4")
    if dim < 1 or K < 1 or step_bound <= 0:
        raise InvalidArgument("need dim >= 1, K >= 1, step_bound > 0")
    grid = tuple(sorted(float(v) for v in lambda_grid))
    sampler = NoiseSampler("uniform-sphere", step_bound, dim, seed)
    variance_sum = 4.0 * K * step_bound ** 2
    counts = np.zeros(len(grid), dtype=int)
    remaining = n_trials
    while remaining > 0:
        chunk = min(remaining, _TRIAL_CHUNK)
        steps = sampler.sample_block(chunk * K).reshape(chunk, K, dim)
        norms = np.linalg.norm(steps.sum(axis=1), axis=1)
        for i, lam in enumerate(grid):
            counts[i] += int(np.count_nonzero(norms >= lam))
        remaining -= chunk
    bound = tuple(4.0 * math.exp(-lam ** 2 / variance_sum) for lam in grid)
    return TailReport(lambda_grid=grid,
                      empirical_tail=tuple(int(c) / n_trials for c in counts),
                      bound=bound, n_trials=n_trials, seed=seed,
                      half_width=hoeffding_half_width(n_trials))


def bernstein_threshold(K: int, step_bound: float, variance: float,
                        delta: float) -> float:
    """Deviation threshold 2 max(2 sqrt(K variance),
    step_bound sqrt(log(1/delta))) sqrt(log(1/delta))."""
    root = math.sqrt(math.log(1.0 / delta))
    return 2.0 * max(2.0 * math.sqrt(K * variance), step_bound * root) * root


def bernstein_tail_experiment(K: int, step_bound: float, variance: float,
                              delta: float, n_trials: int,
                              seed: int = 0) -> TailReport:
    """Tail of a scalar bounded martingale sum past the Bernstein-type
    threshold, against the bound log(K) * delta.

    Increments are symmetric two-point: +-step_bound each with probability
    variance / (2 step_bound^2), zero otherwise, matching the declared
    (step_bound, variance) pair exactly.
    """
    if K < 4:
        raise InvalidArgument("K must be at least 4")
    if not 0.0 < delta < 1.0 / math.e:
        raise InvalidArgument("delta must lie in (0, 1/e)")
    if n_trials < _MIN_TRIALS:
        raise InvalidArgument("n_trials must be at least 10^4")
    if step_bound <= 0 or variance < 0 or variance > step_bound ** 2:
        raise InvalidArgument("need 0 <= variance <= step_bound^2 and "
                              "step_bound > 0")
    q = variance / step_bound ** 2
    threshold = bernstein_threshold(K, step_bound, variance, delta)
    rng = Rng(seed)
    exceed = 0
    remaining = n_trials
    while remaining > 0:
        chunk = min(remaining, _TRIAL_CHUNK)
        u = rng.uniforms(chunk * K).reshape(chunk, K)
        steps = np.where(u <= q / 2.0, step_bound,
                         np.where(u <= q, -step_bound, 0.0))
        exceed += int(np.count_nonzero(steps.sum(axis=1) > threshold))
        remaining -= chunk
    return TailReport(lambda_grid=(threshold,),
                      empirical_tail=(exceed / n_trials,),
                      bound=(math.log(K) * delta,),
                      n_trials=n_trials, seed=seed,
                      half_width=hoeffding_half_width(n_trials))

"""Dispersive noise samplers, slab-shaped narrow sets, and Monte-Carlo
estimation of the mass a sampler puts on a narrow set.

A slab {x : a <= <v, x> <= a + w} is the extremal narrow set: moving any of
its points by more than the width w along v leaves it.  The dispersive
property says a sampler puts mass at most 1/4 on every slab of width
sigma/(4*sqrt(d)), for every direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .rng import Rng, _words_to_uniform

KINDS = ("scaled-gaussian", "uniform-ball", "uniform-sphere", "injected")

# 99% two-sided Hoeffding: P(|est - p| >= t) <= 2 exp(-2 n t^2) = 0.01
_HOEFFDING_LOG = math.log(200.0)

GAUSSIAN_TRUNCATION = 5.0  # resample threshold, in units of sigma


def hoeffding_half_width(n_samples: int, level_log: float = _HOEFFDING_LOG) -> float:
    return math.sqrt(level_log / (2.0 * n_samples))


def dispersive_width(sigma: float, dim: int) -> float:
    """Critical slab width sigma/(4*sqrt(d)) below which mass is <= 1/4."""
    return sigma / (4.0 * math.sqrt(dim))


def sample_scaled_gaussian(sigma: float, dim: int, rng: Rng) -> np.ndarray:
    """(sigma/sqrt(d)) * chi with chi standard normal in R^d."""
    if sigma < 0 or dim < 1:
        raise InvalidArgument("sigma must be >= 0 and dim >= 1")
    return (sigma / math.sqrt(dim)) * rng.normals(dim)


def sample_uniform_ball(sigma: float, dim: int, rng: Rng) -> np.ndarray:
    """Uniform on the radius-sigma ball: Gaussian direction, radius U^(1/d)."""
    if sigma < 0 or dim < 1:
        raise InvalidArgument("sigma must be >= 0 and dim >= 1")
    direction = rng.normals(dim)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        direction[0] = 1.0
        norm = 1.0
    radius = rng.uniform() ** (1.0 / dim)
    return (sigma * radius / norm) * direction


def sample_uniform_sphere(sigma: float, dim: int, rng: Rng) -> np.ndarray:
    """Uniform on the radius-sigma sphere."""
    if sigma < 0 or dim < 1:
        raise InvalidArgument("sigma must be >= 0 and dim >= 1")
    direction = rng.normals(dim)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        direction[0] = 1.0
        norm = 1.0
    return (sigma / norm) * direction


def inject(base_sample: np.ndarray, artificial: "NoiseSampler") -> np.ndarray:
    """Base stochastic-gradient sample plus an independent dispersive draw."""
    return np.asarray(base_sample, dtype=float) + artificial.sample()


class NoiseSampler:
    """A reseedable noise source of one of the four supported kinds.

    Holds its own generator state; confine one instance to one thread at a
    time.  ``truncate`` applies only to scaled-gaussian and enforces the
    almost-sure bound ||xi|| <= 5 sigma by resampling (use it whenever the
    sampler feeds the optimizer; leave it off for dispersive-geometry
    estimates, which study the untruncated law).
    """

    def __init__(self, kind: str, sigma: float, dim: int, seed: int = 0,
                 truncate: bool = False, inner: "NoiseSampler | None" = None):
        if kind not in KINDS:
            raise InvalidArgument(f"unknown sampler kind {kind!r}")
        if sigma < 0:
            raise InvalidArgument("sigma must be nonnegative")
        if dim < 1:
            raise InvalidArgument("dim must be >= 1")
        if kind == "injected" and inner is None:
            raise InvalidArgument("injected sampler needs an inner sampler")
        if truncate and kind != "scaled-gaussian":
            raise InvalidArgument("truncate applies to scaled-gaussian only")
        self.kind = kind
        self.sigma = sigma
        self.dim = dim
        self.seed = int(seed)
        self.truncate = truncate
        self.inner = inner
        self.rng = Rng(seed)

    def reseeded(self, seed: int) -> "NoiseSampler":
        inner = self.inner.reseeded(seed + 1) if self.inner is not None else None
        return NoiseSampler(self.kind, self.sigma, self.dim, seed,
                            self.truncate, inner)

    def sample(self) -> np.ndarray:
        if self.kind == "scaled-gaussian" and self.truncate and self.sigma > 0:
            xi = sample_scaled_gaussian(self.sigma, self.dim, self.rng)
            while np.linalg.norm(xi) > GAUSSIAN_TRUNCATION * self.sigma:
                xi = sample_scaled_gaussian(self.sigma, self.dim, self.rng)
            return xi
        if self.kind == "injected":
            return self.inner.sample() + sample_scaled_gaussian(
                self.sigma, self.dim, self.rng)
        return self.sample_block(1)[0]

    def sample_block(self, count: int) -> np.ndarray:
        """(count, dim) block; row i equals the i-th successive sample().

        Truncated-gaussian and injected samplers fall back to a per-sample
        loop (rejection and the nested stream make rows variable-width).
        """
        if (self.kind == "scaled-gaussian" and self.truncate) or \
                self.kind == "injected":
            return np.stack([self.sample() for _ in range(count)])
        dim = self.dim
        pairs = (dim + 1) // 2
        width = 2 * pairs + (1 if self.kind == "uniform-ball" else 0)
        u = _words_to_uniform(self.rng.words(count * width)
                              ).reshape(count, width)
        r = np.sqrt(-2.0 * np.log(u[:, :pairs]))
        theta = 2.0 * np.pi * u[:, pairs:2 * pairs]
        z = np.hstack([r * np.cos(theta), r * np.sin(theta)])[:, :dim]
        if self.kind == "scaled-gaussian":
            return (self.sigma / math.sqrt(dim)) * z
        norms = np.linalg.norm(z, axis=1)
        zero = norms == 0.0
        if np.any(zero):
            z[zero, 0] = 1.0
            norms[zero] = 1.0
        if self.kind == "uniform-sphere":
            return (self.sigma / norms)[:, None] * z
        radius = u[:, -1] ** (1.0 / dim)
        return (self.sigma * radius / norms)[:, None] * z


@dataclass(frozen=True)
class NarrowSet:
    """The slab {x : offset <= <direction, x> <= offset + width}."""

    direction: np.ndarray
    offset: float
    width: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise InvalidArgument("direction must be a unit vector")
        if self.width < 0:
            raise InvalidArgument("width must be nonnegative")
        object.__setattr__(self, "direction", d)

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Exact membership; x may be a vector or an (n, d) batch."""
        proj = np.asarray(x, dtype=float) @ self.direction
        return (proj >= self.offset) & (proj <= self.offset + self.width)

    @classmethod
    def centered(cls, direction, width: float) -> "NarrowSet":
        """Slab of the given width through the origin, worst case for
        symmetric samplers."""
        return cls(np.asarray(direction, dtype=float), -width / 2.0, width)


@dataclass(frozen=True)
class ProbabilityEstimate:
    estimate: float
    n_samples: int
    half_width: float
    seed: int

    @property
    def upper(self) -> float:
        return self.estimate + self.half_width

    @property
    def lower(self) -> float:
        return self.estimate - self.half_width


def estimate_set_probability(sampler: NoiseSampler, narrow_set: NarrowSet,
                             n_samples: int, seed: int) -> ProbabilityEstimate:
    """Unbiased Monte-Carlo estimate of P(xi in set) with a 99% Hoeffding
    confidence half-width.  Deterministic given the seed."""
    if n_samples < 10_000:
        raise InvalidArgument("n_samples must be at least 10^4")
    local = sampler.reseeded(seed)
    hits = 0
    remaining = n_samples
    while remaining > 0:
        chunk = min(remaining, 32_768)
        block = local.sample_block(chunk)
        hits += int(np.count_nonzero(narrow_set.contains(block)))
        remaining -= chunk
    return ProbabilityEstimate(estimate=hits / n_samples,
                               n_samples=n_samples,
                               half_width=hoeffding_half_width(n_samples),
                               seed=seed)

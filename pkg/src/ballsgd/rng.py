"""Counter-based pseudo-random generator used by every sampler in the package.

The generator is deliberately tiny and written out in full so that a stream
can be reproduced bit-for-bit in any language.  Word ``n`` (zero-based) of the
stream with seed ``s`` is

    out_n = mix64(s + (n + 1) * 0x9E3779B97F4A7C15  mod 2^64)

where ``mix64`` is the SplitMix64 finalizer:

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9  mod 2^64
    z ^= z >> 27;  z *= 0x94D049BB133111EB  mod 2^64
    z ^= z >> 31

Uniform doubles take the top 53 bits: ``u = ((out >> 11) + 1) * 2^-53``,
giving values in (0, 1].  Standard normals come from Box-Muller on
consecutive word pairs (u1, u2):

    r = sqrt(-2 ln u1),  z1 = r cos(2 pi u2),  z2 = r sin(2 pi u2)

The counter only ever moves forward, so a stream is fully determined by the
seed and the sequence of requested block shapes.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)

_TWO_NEG53 = 2.0 ** -53


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def random_words(seed: int, start: int, count: int) -> np.ndarray:
    """Words ``start .. start+count-1`` of the stream with the given seed."""
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    n = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(s + n * _GAMMA)


def _words_to_uniform(words: np.ndarray) -> np.ndarray:
    # (0, 1]: the +1 keeps log() finite for Box-Muller.
    return ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_NEG53


class Rng:
    """Sequential view over the counter-based stream for one seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._counter = 0

    def words(self, count: int) -> np.ndarray:
        out = random_words(self.seed, self._counter, count)
        self._counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """``count`` iid uniforms on (0, 1]."""
        return _words_to_uniform(self.words(count))

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normals(self, count: int) -> np.ndarray:
        """``count`` iid standard normals (consumes 2*ceil(count/2) words)."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        u1, u2 = u[:pairs], u[pairs:]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[:count]

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def normal_rows(self, rows: int, dim: int) -> np.ndarray:
        """A (rows, dim) block of standard normals, row-major in the stream."""
        return self.normals(rows * dim).reshape(rows, dim)

    def unit_vector(self, dim: int) -> np.ndarray:
        v = self.normals(dim)
        return v / np.linalg.norm(v)

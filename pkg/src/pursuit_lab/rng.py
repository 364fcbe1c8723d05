"""Seeded random streams for reproducible experiments.

Generator ``pcg64-boxmuller/1``:

* bits come from numpy's PCG64, whose output stream numpy keeps stable
  across releases and platforms;
* a stream is identified by ``(seed, *key)``; the key becomes the
  ``spawn_key`` of a ``SeedSequence``, so streams with different keys are
  statistically independent and never overlap;
* uniforms are ``(raw >> 11) * 2**-53`` in ``[0, 1)``;
* normals use the Box-Muller transform on consecutive uniform pairs
  (cosine branch first, then sine), not numpy's ziggurat sampler.

Keys used by the package are collected in ``Domain`` so that matrix
generation, signal draws and probe vectors never share a stream.
"""

from __future__ import annotations

import enum

import numpy as np

GENERATOR_NAME = "pcg64-boxmuller/1"

_TWO_POW_53 = float(2**53)


class Domain(enum.IntEnum):
    MATRIX = 1
    SIGNAL = 2
    PROBE = 3
    SUPPORT_SAMPLE = 4
    CONCENTRATION = 5
    SEARCH = 6


class Stream:
    """One independent random stream."""

    def __init__(self, seed: int, *key: int):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._bits = np.random.PCG64(ss)

    def child(self, *key: int) -> "Stream":
        return Stream(self.seed, *self.key, *key)

    def raw(self, n: int) -> np.ndarray:
        return self._bits.random_raw(n)

    def uniform(self, n: int) -> np.ndarray:
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) / _TWO_POW_53

    def normal(self, n: int) -> np.ndarray:
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u lies in (0, 1]
        theta = 2.0 * np.pi * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(theta)
        out[:, 1] = radius * np.sin(theta)
        return out.reshape(-1)[:n]

    def signs(self, n: int) -> np.ndarray:
        """Fair +-1 draws from the top bit of each word."""
        top = (self.raw(n) >> np.uint64(63)).astype(np.float64)
        return 1.0 - 2.0 * top

    def below(self, n: int, size: int) -> np.ndarray:
        return np.minimum((self.uniform(size) * n).astype(np.int64), n - 1)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(n)`` by a partial Fisher-Yates shuffle."""
        return self.sample_subsets(1, n, k)[0]

    def sample_subsets(self, count: int, n: int, k: int, chunk: int = 4096) -> np.ndarray:
        """``count`` independent draws of ``k`` distinct indices from ``range(n)``.

        Each draw consumes exactly ``k`` uniforms, so the first ``c`` rows
        do not depend on ``count`` (prefix stability).
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct items from {n}")
        out = np.empty((count, k), dtype=np.int64)
        steps = np.arange(k)
        for start in range(0, count, chunk):
            rows = min(chunk, count - start)
            u = self.uniform(rows * k).reshape(rows, k)
            pool = np.tile(np.arange(n, dtype=np.int64), (rows, 1))
            r = np.arange(rows)
            for i in range(k):
                j = i + np.minimum((u[:, i] * (n - i)).astype(np.int64), n - i - 1)
                a = pool[r, i].copy()
                pool[r, i] = pool[r, j]
                pool[r, j] = a
            out[start:start + rows] = pool[:, steps]
        return out

    def unit_vectors(self, count: int, dim: int) -> np.ndarray:
        """``count`` x ``dim`` rows drawn uniformly on the unit sphere."""
        z = self.normal(count * dim).reshape(count, dim)
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        # a zero Gaussian draw has probability 0 but would divide by zero
        norms[norms == 0.0] = 1.0
        return z / norms


def stream(seed: int, *key: int) -> Stream:
    return Stream(seed, *key)


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for sub-experiment ``key``, independent of its siblings."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])

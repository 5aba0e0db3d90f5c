"""Seeded, named random streams.

A single integer seed expands into independent streams keyed by name
(``"jumps"``, ``"brownian"``, ``"counts"``, ...), so switching one model
component on or off never perturbs the variates seen by the others.
"""

from __future__ import annotations

import zlib

import numpy as np

from ._backend import get_kernels


def _name_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


class RandomStream:
    """Deterministic pseudo-random source for one named purpose."""

    def __init__(self, seed: int, name: str = "default", block: int | None = None):
        self.seed = int(seed)
        self.name = name
        self._seq = np.random.SeedSequence(self.seed, spawn_key=(_name_key(name),))
        self.generator = np.random.default_rng(self._seq)
        self._block = block

    def child(self, name: str) -> "RandomStream":
        """Independent sub-stream, e.g. one per worker shard."""
        return RandomStream(self.seed, f"{self.name}/{name}", self._block)

    def uniform(self, a=0.0, b=1.0, size=None):
        return self.generator.uniform(a, b, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def poisson(self, mean, size=None):
        return self.generator.poisson(mean, size)

    def exponential(self, mean=1.0, size=None):
        return self.generator.exponential(mean, size)

    def kernel_stream(self, backend: str | None = None):
        """Block-buffered uniform stream consumed by the sampler kernels."""
        k = get_kernels(backend)
        if self._block is None:
            return k.UniformStream(self.generator)
        return k.UniformStream(self.generator, self._block)


def as_stream(rng, name: str = "default") -> RandomStream:
    if isinstance(rng, RandomStream):
        return rng
    if rng is None:
        rng = 0
    return RandomStream(int(rng), name)

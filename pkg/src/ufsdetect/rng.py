"""Deterministic, splittable random streams.

Every random draw in the package comes from an :class:`RngStream`, which is
identified by a master seed and a tuple of integer stream ids. Streams are
built on numpy's ``SeedSequence`` spawn keys and the counter-based Philox
bit generator, so the draws of one stream never depend on how many other
streams were created before it or on which process creates it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

_U64 = 1 << 64


@dataclass(frozen=True)
class RngStream:
    """Opaque handle on an independent pseudo-random stream.

    Args:
        master_seed: 64-bit experiment seed.
        stream_id: Path of non-negative integers naming the substream.
    """

    master_seed: int
    stream_id: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < _U64:
            raise InvalidParameterError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        ids = tuple(int(i) for i in self.stream_id)
        if any(not 0 <= i < _U64 for i in ids):
            raise InvalidParameterError(f"stream ids must fit in 64 bits, got {self.stream_id}")
        object.__setattr__(self, "stream_id", ids)

    def child(self, *ids: int) -> RngStream:
        """Returns the substream obtained by appending ``ids`` to this stream's path."""
        return RngStream(self.master_seed, self.stream_id + tuple(ids))

    def generator(self) -> np.random.Generator:
        """Returns a fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(seq))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidParameterError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def complex_normal(gen: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Draws i.i.d. CN(0, variance) samples (real and imaginary parts each variance/2)."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    parts = gen.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (parts[..., 0] + 1j * parts[..., 1])

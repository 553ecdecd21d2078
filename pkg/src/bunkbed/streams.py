"""Counter-based random streams.

Every stream is a Philox generator keyed by a hash of (seed, *labels), so
parallel workers get independent, reproducible randomness without any
coordination: the same key always yields the same word sequence, and the
draw position acts as the counter.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *labels: int) -> tuple[int, int]:
    """Mix a seed and integer labels into a 128-bit Philox key."""
    acc = _splitmix64(seed & _MASK64)
    for label in labels:
        acc = _splitmix64(acc ^ (label & _MASK64))
    k0 = _splitmix64(acc)
    k1 = _splitmix64(acc ^ 0xA5A5A5A5A5A5A5A5)
    return k0, k1


def _generator(seed: int, *labels: int) -> np.random.Generator:
    k0, k1 = derive_key(seed, *labels)
    return np.random.Generator(
        np.random.Philox(key=np.array([k0, k1], dtype=np.uint64)))


def random_words(n_words: int, seed: int, *labels: int) -> np.ndarray:
    """n_words uniform uint64 words from the stream keyed by (seed, labels)."""
    gen = _generator(seed, *labels)
    return np.frombuffer(gen.bytes(n_words * 8), dtype=np.uint64).copy()


class BitStream:
    """Sequential fair-bit source for one (seed, stream_index) stream.

    ``take(n)`` returns an n-bit integer; identical (seed, stream_index)
    replays the identical bit sequence.
    """

    def __init__(self, seed: int, stream_index: int = 0):
        self.seed = seed
        self.stream_index = stream_index
        self._gen = _generator(seed, stream_index)
        self._buffer = 0
        self._available = 0

    def take(self, n_bits: int) -> int:
        if n_bits < 0:
            raise ValueError("n_bits must be nonnegative")
        while self._available < n_bits:
            word = int(np.frombuffer(self._gen.bytes(8), dtype=np.uint64)[0])
            self._buffer |= word << self._available
            self._available += 64
        out = self._buffer & ((1 << n_bits) - 1)
        self._buffer >>= n_bits
        self._available -= n_bits
        return out

"""Counter-based random streams.

Every random draw in the library comes from a Philox4x64-10 generator (as
implemented by ``numpy.random.Philox``) whose 128-bit key is built from a
64-bit seed and a 64-bit stream index: ``key = seed | (index << 64)``. A
stream is therefore a pure function of ``(seed, index)``; nothing depends on
how many draws other streams consumed, so work can be split across threads
in any order.

Permutations are produced by ``Generator.permutation`` (a Fisher-Yates
shuffle) on the stream keyed by ``(seed, replicate)``.
"""
from __future__ import annotations

import numpy as np

__all__ = ["stream", "permutation", "derive_seed"]

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for substream `index` of `seed`."""
    key = (int(seed) & _MASK64) | ((int(index) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def permutation(seed: int, replicate: int, n: int) -> np.ndarray:
    """The permutation of ``range(n)`` used by replicate `replicate`."""
    return stream(seed, replicate).permutation(n)


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed, e.g. ``derive_seed(seed, trial, 1)`` for a trial's test."""
    words = [int(seed) & _MASK64, *(int(p) & _MASK64 for p in path)]
    return int(np.random.SeedSequence(words).generate_state(1, np.uint64)[0])

"""Seeded random streams.

Every stochastic routine takes either an integer seed or a ready
``numpy.random.Generator``. Streams are Philox (counter based, 64-bit keys);
workers and batches get child streams keyed by their index so results do not
depend on scheduling.
"""

import numpy as np

SeedLike = int | np.random.Generator


def generator(seed: SeedLike) -> np.random.Generator:
    """Return a Philox generator for ``seed`` (or ``seed`` itself if it already is one)."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise TypeError("a seed is required for stochastic operations")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def child(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for (seed, key...), e.g. ``child(seed, batch_index)``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(rng: np.random.Generator) -> int:
    """Draw a fresh 63-bit seed from ``rng`` for handing to child streams."""
    return int(rng.integers(0, 2**63 - 1))

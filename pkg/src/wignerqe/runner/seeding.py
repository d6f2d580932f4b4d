"""Order-independent random streams keyed by ``(master_seed, key, draw)``."""

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer of ``x + golden gamma``."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def stream_seed(master_seed: int, key: int, draw: int) -> int:
    """128-bit Philox key derived from the master seed, the key and the draw."""
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (key & MASK64))
    lo = splitmix64(h ^ (draw & MASK64))
    hi = splitmix64(lo)
    return (hi << 64) | lo


def stream(master_seed: int, key: int, draw: int) -> np.random.Generator:
    """Independent counter-based generator for one ``(key, draw)`` cell."""
    return np.random.Generator(np.random.Philox(key=stream_seed(master_seed, key, draw)))

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

# Offset separating held-out sample streams from training streams
TEST_STREAM_OFFSET = 1 << 32


def splitmix64(seed: int, index: int) -> int:
    """
    Derive the seed of stream ``index`` from a master seed.

    For a fixed master seed the map index -> seed is a bijection on 64-bit
    integers, so distinct indices never share a seed.
    """
    z = (seed + (index + 1) * _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed"""
    return np.random.Generator(np.random.PCG64(seed & _MASK))

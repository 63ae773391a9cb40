from typing import Union

import numpy as np

from ..errors import InvalidParameterError
from ..utils.rng import generator

# Readings are kept above this fraction of the maximum so log data stay finite
POSITIVE_FLOOR = 1e-12


def add_noise(sinogram: np.ndarray, level: float, seed: Union[int, np.random.Generator]) -> np.ndarray:
    """
    Multiplicative Gaussian noise y * (1 + level * xi).

    Args:
        sinogram: clean readings (any shape)
        level: relative standard deviation
        seed: integer seed or a generator to draw from

    Returns:
        noisy copy of ``sinogram``; an exact copy when ``level`` is 0
    """
    if level < 0:
        raise InvalidParameterError("Noise level must be non-negative", level=level)
    sinogram = np.asarray(sinogram, dtype=float)
    if level == 0:
        return sinogram.copy()

    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    noisy = sinogram * (1.0 + level * rng.standard_normal(sinogram.shape))
    floor = POSITIVE_FLOOR * np.abs(sinogram).max(initial=0.0)
    return np.maximum(noisy, floor)

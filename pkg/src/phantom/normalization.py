from dataclasses import asdict, dataclass
from typing import Dict, Iterable

import numpy as np

from ..errors import InvalidParameterError

# Largest contrast multiplier; images are divided by this many backgrounds
IMAGE_SCALE = 5.0


@dataclass(frozen=True)
class ImageNormalizer:
    """mu_a -> mu_a / (5 mu_a0), mapping the background to 0.2"""

    mu_a_background: float

    @property
    def divisor(self) -> float:
        return IMAGE_SCALE * self.mu_a_background

    def normalize(self, mu_a: np.ndarray) -> np.ndarray:
        return np.asarray(mu_a) / self.divisor

    def denormalize(self, image: np.ndarray) -> np.ndarray:
        return np.asarray(image) * self.divisor


@dataclass(frozen=True)
class SinogramNormalizer:
    """Elementwise log followed by a global min-max map to [0, 1]"""

    log_min: float
    log_max: float

    @classmethod
    def fit(cls, sinograms: Iterable[np.ndarray]) -> "SinogramNormalizer":
        lows, highs = [], []
        for sinogram in sinograms:
            logs = np.log(np.asarray(sinogram, dtype=float))
            lows.append(logs.min())
            highs.append(logs.max())
        if not lows:
            raise InvalidParameterError("Cannot fit sinogram statistics on an empty set")
        low, high = float(min(lows)), float(max(highs))
        if high <= low:
            high = low + 1.0
        return cls(low, high)

    def normalize(self, sinogram: np.ndarray) -> np.ndarray:
        sinogram = np.asarray(sinogram, dtype=float)
        if np.any(sinogram <= 0):
            raise InvalidParameterError("Sinogram readings must be positive")
        return (np.log(sinogram) - self.log_min) / (self.log_max - self.log_min)

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return np.exp(np.asarray(values) * (self.log_max - self.log_min) + self.log_min)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

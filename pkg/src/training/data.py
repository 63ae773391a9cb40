from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from ..errors import InvalidParameterError, ShapeMismatchError
from ..phantom.dataset import Dataset
from ..phantom.noise import add_noise
from ..phantom.normalization import SinogramNormalizer


def apply_noise_augmentation(batch: np.ndarray, level: float, rng: np.random.Generator) -> np.ndarray:
    """
    Fresh multiplicative noise on raw (physical) readings.

    Level 0 returns an identical copy without consuming ``rng``.
    """
    if level < 0:
        raise InvalidParameterError("Noise level must be non-negative", level=level)
    return add_noise(batch, level, rng)


@dataclass(frozen=True, eq=False)
class TrainingData:
    """
    Paired physical sinograms (n, M) and normalized images (n, 1, H, W).

    Network inputs are produced by ``inputs``: optional fresh noise on the
    physical readings, then the stored log/min-max normalization.
    """

    ids: Tuple[str, ...]
    sinograms: np.ndarray
    images: np.ndarray
    normalizer: SinogramNormalizer

    def __post_init__(self):
        if len(self.sinograms) != len(self.images) or len(self.ids) != len(self.images):
            raise ShapeMismatchError("Sinograms and images differ in sample count", sinograms=len(self.sinograms), images=len(self.images))

    @classmethod
    def from_dataset(cls, dataset: Dataset) -> "TrainingData":
        sinograms = dataset.sinograms(0.0).reshape(len(dataset), -1)
        images = dataset.images()[:, None, :, :]
        return cls(tuple(dataset.ids), sinograms, images, dataset.sinogram_normalizer)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n_measurements(self) -> int:
        return self.sinograms.shape[1]

    @property
    def image_shape(self) -> Tuple[int, int]:
        return tuple(self.images.shape[2:])

    def subset(self, indices: np.ndarray) -> "TrainingData":
        indices = np.asarray(indices)
        return replace(
            self,
            ids=tuple(self.ids[i] for i in indices),
            sinograms=self.sinograms[indices],
            images=self.images[indices],
        )

    def split(self, validation_fraction: float, rng: np.random.Generator) -> Tuple["TrainingData", "TrainingData"]:
        """Random train/validation partition; an empty validation part when the fraction rounds to 0"""
        n_val = int(round(validation_fraction * len(self)))
        order = rng.permutation(len(self))
        return self.subset(np.sort(order[n_val:])), self.subset(np.sort(order[:n_val]))

    def inputs(self, noise_level: float = 0.0, rng: np.random.Generator = None, dtype=np.float32) -> np.ndarray:
        raw = self.sinograms
        if noise_level > 0:
            if rng is None:
                raise InvalidParameterError("A generator is needed to draw noise", level=noise_level)
            raw = apply_noise_augmentation(raw, noise_level, rng)
        return self.normalizer.normalize(raw).astype(dtype)

    def targets(self, dtype=np.float32) -> np.ndarray:
        return self.images.astype(dtype)


def batches(n: int, batch_size: int, rng: np.random.Generator = None) -> List[np.ndarray]:
    """Index batches of one epoch, shuffled when a generator is given"""
    order = rng.permutation(n) if rng is not None else np.arange(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]

from .dataset import Dataset, DatasetSample, generate_dataset, load_dataset, sample_seed, simulate_sample
from .noise import add_noise
from .normalization import ImageNormalizer, SinogramNormalizer
from .sampling import Phantom, Region, sample_ood_phantom, sample_phantom

__all__ = [
    "Dataset",
    "DatasetSample",
    "generate_dataset",
    "load_dataset",
    "sample_seed",
    "simulate_sample",
    "add_noise",
    "ImageNormalizer",
    "SinogramNormalizer",
    "Phantom",
    "Region",
    "sample_ood_phantom",
    "sample_phantom",
]

"""Synthetic dataset generation and loading.

A dataset directory holds ``manifest.json``, the background sinogram, the
voxel mask and, per sample, a normalized image, a clean sinogram and one
noisy sinogram per configured non-zero noise level. Noisy copies are stored
for the held-out kinds only; training draws fresh noise from the clean
readings.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..checks.base import CheckChain
from ..checks.data import SinogramPositivityCheck, dataset_check_chain
from ..config import RunConfig, dump_config
from ..errors import DataIOError, InvalidParameterError
from ..geometry.voxels import rasterize
from ..io.binary import read_array, write_array
from ..io.manifest import read_manifest, write_manifest
from ..schemas.manifest import DatasetManifest, Normalization, SampleRecord
from ..scene import Scene
from ..utils.logging import get_logger
from ..utils.rng import TEST_STREAM_OFFSET, splitmix64
from .noise import add_noise
from .normalization import ImageNormalizer, SinogramNormalizer
from .sampling import Phantom, sample_ood_phantom, sample_phantom

logger = get_logger(__name__)

KINDS = ("train", "test", "ood")
HELD_OUT_KINDS = ("test", "ood")

# Per-process scene for pool workers
_WORKER_SCENE: Optional[Scene] = None


@dataclass(frozen=True, eq=False)
class DatasetSample:
    """One generated sample in physical units (images normalized)"""

    id: str
    index: int
    seed: int
    phantom: Phantom
    image: np.ndarray
    sinogram_clean: np.ndarray
    sinogram_noisy: Dict[float, np.ndarray]


def noise_key(level: float) -> str:
    return f"{level:g}"


def sample_seed(master_seed: int, index: int, kind: str = "train") -> int:
    """Seed of sample ``index``; held-out kinds draw from a disjoint stream"""
    offset = 0 if kind == "train" else TEST_STREAM_OFFSET
    return splitmix64(master_seed, offset + index)


def simulate_sample(scene: Scene, index: int, seed: int, kind: str, noise_levels: Sequence[float]) -> DatasetSample:
    """Draw a phantom, rasterize it and simulate its clean and noisy sinograms"""
    config = scene.config
    background = config.optics.mu_a_background
    sampler = sample_ood_phantom if kind == "ood" else sample_phantom
    phantom = sampler(seed, scene.shape, config.phantom, background=background)

    image = ImageNormalizer(background).normalize(rasterize(phantom, scene.grid, background=background))
    clean = scene.model.sinogram(phantom).values
    noisy = {
        level: add_noise(clean, level, splitmix64(seed, k + 1))
        for k, level in enumerate(noise_levels)
        if level > 0
    }
    return DatasetSample(f"sample_{index:05d}", index, seed, phantom, image, clean, noisy)


def _init_worker(config_data: dict) -> None:
    global _WORKER_SCENE
    _WORKER_SCENE = Scene.from_config(RunConfig(**config_data))


def _simulate_in_worker(job: Tuple[int, int, str, Tuple[float, ...]]) -> DatasetSample:
    index, seed, kind, levels = job
    return simulate_sample(_WORKER_SCENE, index, seed, kind, levels)


def generate_dataset(
    config: RunConfig,
    out_dir: Union[str, Path],
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    kind: str = "train",
    scene: Optional[Scene] = None,
) -> DatasetManifest:
    """
    Generate and persist a dataset.

    Args:
        config: run configuration (geometry, optics, phantom rules, noise levels;
            noisy copies are written for ``test`` and ``ood`` only)
        out_dir: target directory, created if needed
        n_samples: sample count, defaults to ``config.dataset.n_samples``
        seed: master seed, defaults to ``config.dataset.seed``
        kind: ``train``, ``test`` or ``ood`` (elliptical regions)
        scene: prebuilt scene for ``config``

    Returns:
        DatasetManifest: the manifest written to ``out_dir``
    """
    if kind not in KINDS:
        raise InvalidParameterError("Unknown dataset kind", kind=kind)
    n_samples = config.dataset.n_samples if n_samples is None else n_samples
    seed = config.dataset.seed if seed is None else seed
    if n_samples < 1:
        raise InvalidParameterError("Dataset needs at least one sample", n_samples=n_samples)

    levels = tuple(sorted(set(config.dataset.noise_levels)))
    if kind not in HELD_OUT_KINDS:
        levels = tuple(level for level in levels if level == 0)
    out_dir = Path(out_dir)
    scene = scene or Scene.from_config(config)
    started = time.perf_counter()
    logger.info("Generating dataset", extra={"samples": n_samples, "kind": kind, "seed": seed})

    jobs = [(i, sample_seed(seed, i, kind), kind, levels) for i in range(n_samples)]
    workers = 1 if config.deterministic else config.dataset.workers
    if workers > 1:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(dump_config(config),)
        ) as pool:
            samples = list(pool.map(_simulate_in_worker, jobs, chunksize=max(1, n_samples // (4 * workers))))
    else:
        samples = [simulate_sample(scene, *job) for job in jobs]

    positivity = CheckChain([SinogramPositivityCheck()])
    for sample in samples:
        for sinogram in [sample.sinogram_clean, *sample.sinogram_noisy.values()]:
            result = positivity.check(sinogram)
            if not result.passed:
                raise DataIOError(f"{sample.id}: {result.message}")

    background = config.optics.mu_a_background
    sinogram_stats = SinogramNormalizer.fit(s.sinogram_clean for s in samples)
    normalization = Normalization(
        mu_a_background=background,
        image_divisor=ImageNormalizer(background).divisor,
        sinogram_log_min=sinogram_stats.log_min,
        sinogram_log_max=sinogram_stats.log_max,
    )

    write_array(out_dir / "background.dotb", scene.model.sinogram(background).values)
    write_array(out_dir / "mask.dotb", scene.grid.mask.astype(np.float64))
    records: List[SampleRecord] = []
    for sample in samples:
        image_name = f"images/{sample.id}.dotb"
        sinogram_name = f"sinograms/{sample.id}.dotb"
        write_array(out_dir / image_name, sample.image)
        write_array(out_dir / sinogram_name, sample.sinogram_clean)
        noisy = {}
        for level, values in sample.sinogram_noisy.items():
            name = f"noisy/{noise_key(level)}/{sample.id}.dotb"
            write_array(out_dir / name, values)
            noisy[noise_key(level)] = name
        records.append(
            SampleRecord(
                id=sample.id,
                index=sample.index,
                seed=sample.seed,
                phantom=sample.phantom.to_dict(),
                image=image_name,
                sinogram=sinogram_name,
                noisy=noisy,
            )
        )

    manifest = DatasetManifest(
        kind=kind,
        n_samples=n_samples,
        image_shape=list(scene.grid.image_shape),
        sinogram_shape=[scene.layout.n_s, scene.layout.n_d],
        active_voxels=scene.grid.V,
        master_seed=seed,
        noise_levels=list(levels),
        normalization=normalization,
        background="background.dotb",
        mask="mask.dotb",
        config=dump_config(config),
        samples=records,
    )
    write_manifest(out_dir, manifest)
    result = dataset_check_chain(out_dir).check(manifest)
    if not result.passed:
        raise DataIOError(f"Generated dataset failed validation: {result.message}", path=str(out_dir))

    logger.info(
        "Dataset written",
        extra={"samples": n_samples, "path": str(out_dir), "seconds": round(time.perf_counter() - started, 3)},
    )
    return manifest


class Dataset:
    """Read access to a dataset directory"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.manifest = read_manifest(self.root, DatasetManifest)
        result = dataset_check_chain(self.root).check(self.manifest)
        if not result.passed:
            raise DataIOError(f"Dataset failed validation: {result.message}", path=str(self.root))

    def __len__(self) -> int:
        return self.manifest.n_samples

    @property
    def ids(self) -> List[str]:
        return [record.id for record in self.manifest.samples]

    @cached_property
    def image_normalizer(self) -> ImageNormalizer:
        return ImageNormalizer(self.manifest.normalization.mu_a_background)

    @cached_property
    def sinogram_normalizer(self) -> SinogramNormalizer:
        stats = self.manifest.normalization
        return SinogramNormalizer(stats.sinogram_log_min, stats.sinogram_log_max)

    @cached_property
    def mask(self) -> np.ndarray:
        return read_array(self.root / self.manifest.mask) > 0.5

    @cached_property
    def background(self) -> np.ndarray:
        return read_array(self.root / self.manifest.background)

    def phantom(self, sample_id: str) -> Phantom:
        return Phantom.from_dict(self.manifest.sample(sample_id).phantom)

    def image(self, sample_id: str) -> np.ndarray:
        return read_array(self.root / self.manifest.sample(sample_id).image)

    def sinogram(self, sample_id: str, noise_level: float = 0.0) -> np.ndarray:
        """Clean readings, or the stored noisy copy for a non-zero level"""
        record = self.manifest.sample(sample_id)
        if noise_level == 0:
            return read_array(self.root / record.sinogram)
        key = noise_key(noise_level)
        if key not in record.noisy:
            raise DataIOError("No stored noisy copy at this level", sample=sample_id, level=noise_level)
        return read_array(self.root / record.noisy[key])

    def images(self) -> np.ndarray:
        """(n, ny, nx) normalized images"""
        return np.stack([self.image(i) for i in self.ids])

    def sinograms(self, noise_level: float = 0.0) -> np.ndarray:
        """(n, n_s, n_d) physical readings"""
        return np.stack([self.sinogram(i, noise_level) for i in self.ids])


def load_dataset(root: Union[str, Path]) -> Dataset:
    return Dataset(root)

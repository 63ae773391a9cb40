"""Library entry points behind each command-line subcommand.

Every function takes a validated RunConfig and raises DotError subclasses;
the command-line shell maps those onto exit codes.
"""

import time
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..architectures.composite import ARCHITECTURES
from ..config import RunConfig
from ..errors import ConfigError, ShapeMismatchError
from ..geometry.shapes import DomainShape
from ..geometry.voxels import VoxelGrid, build_voxel_grid
from ..io.binary import read_array, write_array
from ..io.images import emit_image
from ..io.manifest import read_manifest, write_manifest
from ..metrics.report import build_report, evaluate_sample, format_summary, write_report
from ..phantom.dataset import KINDS, Dataset, generate_dataset, load_dataset
from ..phantom.normalization import SinogramNormalizer
from ..rytov.jacobian import build_rhs, rytov_system
from ..scene import Scene
from ..schemas.manifest import DatasetManifest, ReconstructionManifest, ReconstructionRecord
from ..schemas.metrics import MetricReport
from ..training.checkpoint import load_checkpoint
from ..training.losses import LOSS_VARIANTS
from ..training.pipeline import reconstruct_images, run_training
from ..utils.logging import RunLoggerAdapter, get_logger
from ..variational.bregman import bregman_solve
from ..variational.elastic_net import elastic_net_solve
from ..variational.result import mu_over_d
from ..variational.spectral import svd_filter_solve

logger = get_logger(__name__)

METHODS = ("elastic-net", "bregman", "tikhonov", "tsvd", "nn")
PathLike = Union[str, Path]


def generate(config: RunConfig, out_dir: PathLike, n_samples: Optional[int] = None, seed: Optional[int] = None, kind: str = "train") -> DatasetManifest:
    if kind not in KINDS:
        raise ConfigError("Unknown dataset kind", kind=kind)
    return generate_dataset(config, out_dir, n_samples=n_samples, seed=seed, kind=kind)


def with_training(config: RunConfig, **updates) -> RunConfig:
    """Copy of ``config`` with training fields replaced"""
    updates = {key: value for key, value in updates.items() if value is not None}
    return config.model_copy(update={"training": config.training.model_copy(update=updates)})


def train(
    config: RunConfig,
    data_dir: PathLike,
    out_dir: PathLike,
    architecture: str = "mod-dot-conv",
    loss: Optional[str] = None,
    noise: Optional[float] = None,
    pretrain: bool = True,
    denoise: bool = False,
):
    if architecture not in ARCHITECTURES:
        raise ConfigError("Unknown architecture", architecture=architecture)
    if loss is not None and loss not in LOSS_VARIANTS:
        raise ConfigError("Unknown loss variant", loss=loss)
    if noise is not None and noise < 0:
        raise ConfigError("Noise level must be non-negative", noise=noise)
    config = with_training(config, loss_variant=loss, noise_level=noise)
    dataset = load_dataset(data_dir)
    return run_training(dataset, config, out_dir, architecture, pretrain=pretrain, denoise=denoise)


def dataset_config(dataset: Dataset, config: RunConfig) -> RunConfig:
    """Geometry, optics and discretization of the dataset with the solver settings of ``config``"""
    stored = RunConfig(**dataset.manifest.config)
    return stored.model_copy(
        update={
            "elastic_net": config.elastic_net,
            "bregman": config.bregman,
            "spectral": config.spectral,
            "rytov": config.rytov,
            "training": config.training,
            "metrics": config.metrics,
            "deterministic": config.deterministic,
        }
    )


def dataset_grid(dataset: Dataset) -> VoxelGrid:
    geometry = RunConfig(**dataset.manifest.config).geometry
    return build_voxel_grid(DomainShape.from_config(geometry), geometry.grid_nx, geometry.grid_ny)


def _write_outputs(out_dir: Path, sample_id: str, image: np.ndarray, config: RunConfig, mask: np.ndarray) -> Dict[str, str]:
    image_name = f"images/{sample_id}.dotb"
    write_array(out_dir / image_name, image.astype(np.float64))
    preview = np.where(mask, mu_over_d(np.where(mask, image, config.optics.mu_a_background), config.optics), 0.0)
    preview_name = f"previews/{sample_id}"
    emit_image(preview, out_dir / preview_name)
    return {"image": image_name, "preview": preview_name + ".pgm"}


def reconstruct(
    config: RunConfig,
    method: str,
    data_dir: PathLike,
    out_dir: PathLike,
    model_dir: Optional[PathLike] = None,
    noise: float = 0.0,
) -> ReconstructionManifest:
    """
    Reconstruct every sample of a dataset at one noise level.

    Writes ``images/<id>.dotb`` (mu_a, cm^-1), ``previews/<id>.pgm`` scaled
    as mu_a / D, ``raw/<id>.dotb`` for networks with a denoiser, and a
    manifest with per-sample solver records.
    """
    if method not in METHODS:
        raise ConfigError("Unknown reconstruction method", method=method)
    if method == "nn" and model_dir is None:
        raise ConfigError("The nn method needs --model")

    out_dir = Path(out_dir)
    dataset = load_dataset(data_dir)
    run_config = dataset_config(dataset, config)
    log = RunLoggerAdapter(logger, {"stage": "reconstruct", "method": method})
    started = time.perf_counter()
    records: List[ReconstructionRecord] = []

    if method == "nn":
        checkpoint = load_checkpoint(model_dir)
        model = checkpoint.model
        if tuple(model.image_shape) != tuple(dataset.manifest.image_shape):
            raise ShapeMismatchError("Model and dataset image shapes differ", model=model.image_shape, dataset=dataset.manifest.image_shape)
        stats = checkpoint.manifest.normalization or dataset.manifest.normalization
        normalizer = SinogramNormalizer(stats.sinogram_log_min, stats.sinogram_log_max)
        inputs = normalizer.normalize(dataset.sinograms(noise).reshape(len(dataset), -1))
        final = reconstruct_images(model, inputs, denoise=True)
        raw = reconstruct_images(model, inputs, denoise=False) if "denoiser" in model.networks else None
        for k, sample_id in enumerate(dataset.ids):
            image = np.where(dataset.mask, final[k] * stats.image_divisor, 0.0)
            files = _write_outputs(out_dir, sample_id, image, run_config, dataset.mask)
            if raw is not None:
                files["raw"] = f"raw/{sample_id}.dotb"
                write_array(out_dir / files["raw"], np.where(dataset.mask, raw[k] * stats.image_divisor, 0.0))
            records.append(ReconstructionRecord(id=sample_id, **files))
    else:
        scene = Scene.from_config(run_config)
        system = rytov_system(
            scene.mesh,
            run_config.optics,
            scene.layout,
            scene.grid,
            run_config.forward,
            kernel=run_config.rytov.kernel,
            single_precision=run_config.rytov.single_precision,
        )
        background = run_config.optics.mu_a_background
        for sample_id in dataset.ids:
            b = build_rhs(dataset.sinogram(sample_id, noise), dataset.background)
            if method == "elastic-net":
                result = elastic_net_solve(system.J, b, run_config.elastic_net, background=background)
            elif method == "bregman":
                result = bregman_solve(system.J, b, run_config.bregman, background=background)
            else:
                spectral = run_config.spectral
                result = svd_filter_solve(
                    system.J,
                    b,
                    spectral.alpha,
                    mode=method,
                    rank=spectral.rank,
                    alpha_fraction=spectral.alpha_fraction,
                    background=background,
                )
            image = scene.grid.to_image(result.mu, fill=0.0)
            files = _write_outputs(out_dir, sample_id, image, run_config, scene.grid.mask)
            records.append(ReconstructionRecord(id=sample_id, info=result.info, **files))
            log.info("Sample reconstructed", extra={"id": sample_id, "alpha": result.info.alpha, "iterations": result.info.iterations})

    manifest = ReconstructionManifest(
        method=method,
        noise_level=noise,
        dataset=str(Path(data_dir)),
        image_shape=list(dataset.manifest.image_shape),
        samples=records,
    )
    write_manifest(out_dir, manifest)
    log.info("Reconstruction finished", extra={"samples": len(records), "seconds": round(time.perf_counter() - started, 3)})
    return manifest


def _sample_mse(recon_dir: Path, manifest: ReconstructionManifest, dataset: Dataset, ids: List[str]) -> np.ndarray:
    divisor = dataset.manifest.normalization.image_divisor
    mask = dataset.mask
    values = []
    for sample_id in ids:
        recon = read_array(recon_dir / manifest.record(sample_id).image) / divisor
        values.append(float(np.mean((recon - dataset.image(sample_id))[mask] ** 2)))
    return np.array(values)


def evaluate(
    config: RunConfig,
    recon_dir: PathLike,
    truth_dir: PathLike,
    out: PathLike,
    compare_dir: Optional[PathLike] = None,
) -> MetricReport:
    """
    Score reconstructions against a dataset.

    Writes ``<out>.csv`` (one row per sample), ``<out>.json`` (aggregates) and
    ``<out>.txt`` (summary table).

    Raises:
        ConfigError: reconstructions name samples missing from the dataset, or
            no sample is shared
    """
    recon_dir = Path(recon_dir)
    manifest = read_manifest(recon_dir, ReconstructionManifest)
    dataset = load_dataset(truth_dir)
    truth_ids = set(dataset.ids)
    recon_ids = [record.id for record in manifest.samples]
    unknown = [i for i in recon_ids if i not in truth_ids]
    if unknown or not recon_ids:
        raise ConfigError("Reconstructions and ground truth do not share their samples", unknown=len(unknown), shared=len(recon_ids) - len(unknown))

    grid = dataset_grid(dataset)
    divisor = dataset.manifest.normalization.image_divisor
    samples = []
    for sample_id in recon_ids:
        reconstruction = read_array(recon_dir / manifest.record(sample_id).image)
        truth = dataset.image_normalizer.denormalize(dataset.image(sample_id))
        samples.append(
            evaluate_sample(sample_id, reconstruction, truth, dataset.phantom(sample_id), grid, divisor, config.metrics)
        )

    compare = None
    if compare_dir is not None:
        compare_dir = Path(compare_dir)
        other = read_manifest(compare_dir, ReconstructionManifest)
        shared = [i for i in recon_ids if i in {r.id for r in other.samples}]
        compare = _sample_mse(compare_dir, other, dataset, shared)

    report = build_report(samples, manifest.method, manifest.noise_level, compare, config.metrics.histogram_bins)
    write_report(report, out)
    Path(out).with_suffix(".txt").write_text(format_summary(report), encoding="utf-8")
    logger.info("Evaluation finished", extra={"samples": len(samples), "report": str(out)})
    return report

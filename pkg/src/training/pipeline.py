from pathlib import Path
from typing import Dict, Union

import numpy as np

from ..architectures.composite import ReconstructionModel, build_model
from ..config import RunConfig, dump_config
from ..phantom.dataset import Dataset
from ..utils.logging import RunLoggerAdapter, get_logger
from .checkpoint import save_checkpoint
from .data import TrainingData
from .loop import (
    TrainingHistory,
    optimizer_names,
    phase_generator,
    predict,
    pretrain_ae,
    train_coupled,
    train_denoiser,
)

logger = get_logger(__name__)

MODEL_DIR = "model"


def run_training(
    dataset: Dataset,
    config: RunConfig,
    out_dir: Union[str, Path],
    architecture: str,
    pretrain: bool = True,
    denoise: bool = False,
) -> Dict[str, TrainingHistory]:
    """
    Full training run: optional autoencoder pretraining, coupled training and
    optional denoiser training on frozen reconstructions.

    Writes ``losses_<phase>.csv`` per phase, periodic checkpoints under
    ``checkpoints/`` and the final model under ``model/``.
    """
    train_config = config.training
    out_dir = Path(out_dir)
    log = RunLoggerAdapter(logger, {"stage": "train", "architecture": architecture})

    all_data = TrainingData.from_dataset(dataset)
    train_data, val_data = all_data.split(train_config.validation_fraction, phase_generator(train_config, "split"))
    model = build_model(
        architecture,
        image_shape=all_data.image_shape,
        n_measurements=all_data.n_measurements,
        latent_size=train_config.latent_size,
        seed=train_config.seed,
        dtype=np.dtype(train_config.dtype),
        denoiser=denoise,
    )
    normalization = dataset.manifest.normalization
    common = dict(
        loss_variant=train_config.loss_variant,
        noise_level=train_config.noise_level,
        normalization=normalization,
        mask=dataset.mask,
        config=dump_config(config),
    )

    def checkpointer(phase: str, names=None):
        def save(epoch, optimizer, rng):
            save_checkpoint(
                out_dir / "checkpoints" / f"{phase}_{epoch:06d}",
                model,
                phase=phase,
                epoch=epoch,
                optimizer=optimizer,
                optimizer_names=names,
                rng=rng,
                **common,
            )

        return save

    histories: Dict[str, TrainingHistory] = {}
    if pretrain:
        log.info("Pretraining data autoencoder")
        histories["data_ae"] = pretrain_ae(
            model["data_encoder"],
            model["data_decoder"],
            train_data.inputs(dtype=train_config.dtype),
            train_config,
            train_config.epochs_data_ae,
            phase="data_ae",
            validation=val_data.inputs(dtype=train_config.dtype),
            checkpoint=checkpointer("data_ae"),
        )
        log.info("Pretraining signal autoencoder")
        histories["signal_ae"] = pretrain_ae(
            model["signal_encoder"],
            model["signal_decoder"],
            train_data.targets(train_config.dtype),
            train_config,
            train_config.epochs_signal_ae,
            phase="signal_ae",
            validation=val_data.targets(train_config.dtype),
            checkpoint=checkpointer("signal_ae"),
        )

    log.info("Coupled training", extra={"loss": train_config.loss_variant, "pretrained": pretrain})
    histories["coupled"] = train_coupled(
        model,
        train_data,
        train_config,
        validation=val_data,
        checkpoint=checkpointer("coupled", optimizer_names(model, train_config.loss_variant)),
    )

    if denoise:
        log.info("Training denoiser on frozen reconstructions")
        noisy = train_data.inputs(train_config.noise_level, phase_generator(train_config, "denoiser"), train_config.dtype)
        raw = predict(model.reconstructor(), noisy, train_config.batch_size)
        histories["denoiser"] = train_denoiser(
            model["denoiser"], raw, train_data.targets(train_config.dtype), train_config, checkpoint=checkpointer("denoiser")
        )

    for phase, history in histories.items():
        history.write_csv(out_dir / f"losses_{phase}.csv")
    final_phase = "denoiser" if denoise else "coupled"
    save_checkpoint(out_dir / MODEL_DIR, model, phase=final_phase, epoch=histories[final_phase].records[-1].epoch, **common)
    log.info("Training run finished", extra={"path": str(out_dir)})
    return histories


def reconstruct_images(model: ReconstructionModel, inputs: np.ndarray, denoise: bool = True, batch_size: int = 64) -> np.ndarray:
    """Normalized images (n, H, W) from normalized readings (n, M)"""
    cascade = model.inference() if denoise else model.reconstructor()
    return predict(cascade, inputs.astype(model["data_encoder"].parameters()[0].dtype), batch_size)[:, 0]

"""Training loops: autoencoder pretraining, coupled training and the denoiser.

All loops share ``fit``: Adam over the given parameters, per-epoch shuffling
from a seeded generator, a NaN/inf guard, one log record per epoch and an
optional checkpoint callback.
"""

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ..architectures.composite import ReconstructionModel
from ..architectures.networks import NetworkSpec
from ..autodiff.functional import mse_loss
from ..autodiff.optim import Adam
from ..autodiff.tensor import Tensor
from ..config import TrainConfig
from ..errors import ShapeMismatchError, TrainingDivergedError
from ..schemas.results import EpochRecord
from ..utils.logging import RunLoggerAdapter, get_logger
from ..utils.rng import generator, splitmix64
from ..utils.telemetry import TRAINING_EPOCHS, TRAINING_LOSS
from .checkpoint import Checkpoint
from .data import TrainingData, batches
from .losses import coupled_loss, trainable_networks

logger = get_logger(__name__)

# Stream indices of the per-phase generators derived from the training seed
_PHASE_STREAMS = {"data_ae": 1, "signal_ae": 2, "coupled": 3, "denoiser": 4, "split": 5, "validation": 6}

BatchLoss = Callable[[np.ndarray, np.ndarray], Tensor]
CheckpointFn = Callable[[int, Adam, np.random.Generator], None]


@dataclass
class TrainingHistory:
    """Per-epoch losses of one phase"""

    phase: str
    records: List[EpochRecord] = field(default_factory=list)

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.records])

    def val_losses(self) -> np.ndarray:
        return np.array([np.nan if r.val_loss is None else r.val_loss for r in self.records])

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["phase", "epoch", "loss", "val_loss"])
            for r in self.records:
                writer.writerow([r.phase, r.epoch, repr(r.loss), "" if r.val_loss is None else repr(r.val_loss)])
        return path


def phase_generator(config: TrainConfig, phase: str) -> np.random.Generator:
    return generator(splitmix64(config.seed, _PHASE_STREAMS[phase]))


def _parameter_names(networks: Sequence[NetworkSpec]) -> List[str]:
    return [name for spec in networks for name, _ in spec.named_parameters()]


def _parameters(networks: Sequence[NetworkSpec]) -> List[Tensor]:
    return [p for spec in networks for p in spec.parameters()]


def fit(
    phase: str,
    parameters: List[Tensor],
    batch_loss: BatchLoss,
    epoch_inputs: Callable[[np.random.Generator], np.ndarray],
    n_samples: int,
    epochs: int,
    config: TrainConfig,
    rng: np.random.Generator,
    validate: Optional[Callable[[], float]] = None,
    checkpoint: Optional[CheckpointFn] = None,
    optimizer: Optional[Adam] = None,
    start_epoch: int = 0,
) -> TrainingHistory:
    """
    Generic minibatch loop.

    Args:
        phase: name used in logs, telemetry and the history
        parameters: tensors updated by Adam
        batch_loss: (epoch inputs, batch indices) -> scalar loss
        epoch_inputs: draws the inputs of one epoch (fresh noise, if any)
        n_samples: training set size
        epochs: last epoch to run
        config: batch size, learning rate, shuffling, checkpoint cadence
        rng: generator for noise and shuffling
        validate: returns the validation loss after each epoch
        checkpoint: called with (epoch, optimizer, rng) every
            ``config.checkpoint_every`` epochs
        optimizer: continue from an existing optimizer
        start_epoch: number of epochs already completed

    Raises:
        TrainingDivergedError: a batch loss is NaN or infinite
    """
    optimizer = optimizer or Adam(parameters, lr=config.lr)
    history = TrainingHistory(phase)
    log = RunLoggerAdapter(logger, {"stage": "train", "phase": phase})
    log.info("Training phase started", extra={"samples": n_samples, "epochs": epochs, "start_epoch": start_epoch})
    started = time.perf_counter()

    for epoch in range(start_epoch + 1, epochs + 1):
        inputs = epoch_inputs(rng)
        total = 0.0
        for index in batches(n_samples, config.batch_size, rng if config.shuffle else None):
            optimizer.zero_grad()
            loss = batch_loss(inputs, index)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError("Training loss is not finite", phase=phase, epoch=epoch, loss=value)
            loss.backward()
            optimizer.step()
            total += value * len(index)

        record = EpochRecord(phase=phase, epoch=epoch, loss=total / n_samples, val_loss=validate() if validate else None)
        history.records.append(record)
        TRAINING_EPOCHS.labels(phase=phase).inc()
        TRAINING_LOSS.labels(phase=phase).set(record.loss)
        log.info("Epoch finished", extra=record.model_dump())

        if checkpoint is not None and config.checkpoint_every and epoch % config.checkpoint_every == 0:
            checkpoint(epoch, optimizer, rng)

    log.info("Training phase finished", extra={"seconds": round(time.perf_counter() - started, 3)})
    return history


def _check_features(spec: NetworkSpec, data: np.ndarray) -> None:
    if tuple(data.shape[1:]) != tuple(spec.input_shape):
        raise ShapeMismatchError("Training data does not fit the network input", network=spec.name, data=data.shape[1:], expected=spec.input_shape)


def pretrain_ae(
    encoder: NetworkSpec,
    decoder: NetworkSpec,
    data: np.ndarray,
    config: TrainConfig,
    epochs: int,
    phase: str = "data_ae",
    validation: Optional[np.ndarray] = None,
    checkpoint: Optional[CheckpointFn] = None,
) -> TrainingHistory:
    """
    Fit decoder(encoder(x)) to x by mean squared error.

    Args:
        encoder, decoder: the two halves of one autoencoder
        data: training samples shaped like the encoder input plus a batch axis
        config: training hyperparameters
        epochs: number of epochs
        phase: ``data_ae`` or ``signal_ae``
        validation: held-out samples for monitoring
    """
    _check_features(encoder, data)
    data = data.astype(config.dtype)
    networks = [encoder, decoder]

    def batch_loss(inputs, index):
        x = inputs[index]
        return mse_loss(decoder(encoder(x)), x)

    validate = None
    if validation is not None and len(validation):
        validation = validation.astype(config.dtype)

        def validate():
            return mse_loss(decoder(encoder(validation)), validation).item()

    return fit(
        phase,
        _parameters(networks),
        batch_loss,
        lambda rng: data,
        len(data),
        epochs,
        config,
        phase_generator(config, phase),
        validate=validate,
        checkpoint=checkpoint,
    )


def train_coupled(
    model: ReconstructionModel,
    data: TrainingData,
    config: TrainConfig,
    validation: Optional[TrainingData] = None,
    checkpoint: Optional[CheckpointFn] = None,
    resume: Optional[Checkpoint] = None,
) -> TrainingHistory:
    """
    Train the sinogram-to-image cascade with the configured loss variant.

    Noise at ``config.noise_level`` is redrawn on the physical readings at
    every epoch. All networks that enter the loss are updated jointly.

    Args:
        model: networks of the architecture
        data: training pairs
        config: hyperparameters and loss variant
        validation: held-out pairs, noisy with a fixed draw
        checkpoint: periodic checkpoint callback
        resume: continue from a checkpoint of this phase (weights, Adam
            moments, generator state and epoch)
    """
    if data.n_measurements != model.n_measurements or data.image_shape != tuple(model.image_shape):
        raise ShapeMismatchError(
            "Training data does not fit the model",
            measurements=data.n_measurements,
            image_shape=data.image_shape,
            model_measurements=model.n_measurements,
            model_image_shape=model.image_shape,
        )
    networks = trainable_networks(model, config.loss_variant)
    parameters = _parameters(networks)
    optimizer = Adam(parameters, lr=config.lr)
    rng = phase_generator(config, "coupled")
    start_epoch = 0
    if resume is not None:
        resume.restore_optimizer(optimizer, _parameter_names(networks))
        rng = resume.restore_rng() or rng
        start_epoch = resume.epoch

    targets = data.targets(config.dtype)

    def epoch_inputs(epoch_rng):
        return data.inputs(config.noise_level, epoch_rng, config.dtype)

    def batch_loss(inputs, index):
        return coupled_loss(model, inputs[index], targets[index], config)

    validate = None
    if validation is not None and len(validation):
        val_inputs = validation.inputs(config.noise_level, phase_generator(config, "validation"), config.dtype)
        val_targets = validation.targets(config.dtype)

        def validate():
            return mse_loss(model.reconstructor()(val_inputs), val_targets).item()

    def save(epoch, opt, epoch_rng):
        if checkpoint is not None:
            checkpoint(epoch, opt, epoch_rng)

    return fit(
        "coupled",
        parameters,
        batch_loss,
        epoch_inputs,
        len(data),
        config.epochs_coupled,
        config,
        rng,
        validate=validate,
        checkpoint=save if checkpoint is not None else None,
        optimizer=optimizer,
        start_epoch=start_epoch,
    )


def optimizer_names(model: ReconstructionModel, variant: str) -> List[str]:
    """Parameter names, in optimizer order, of the coupled phase"""
    return _parameter_names(trainable_networks(model, variant))


def train_denoiser(
    denoiser: NetworkSpec,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
    checkpoint: Optional[CheckpointFn] = None,
) -> TrainingHistory:
    """
    Fit the denoiser to map raw reconstructions onto ground-truth images.

    Args:
        denoiser: the post-processing network
        inputs: reconstructions of a frozen upstream model, (n, 1, H, W)
        targets: normalized ground truth, (n, 1, H, W)
    """
    _check_features(denoiser, inputs)
    if inputs.shape != targets.shape:
        raise ShapeMismatchError("Denoiser inputs and targets differ in shape", inputs=inputs.shape, targets=targets.shape)
    inputs = inputs.astype(config.dtype)
    targets = targets.astype(config.dtype)

    def batch_loss(epoch_inputs, index):
        return mse_loss(denoiser(epoch_inputs[index]), targets[index])

    return fit(
        "denoiser",
        denoiser.parameters(),
        batch_loss,
        lambda rng: inputs,
        len(inputs),
        config.epochs_denoiser,
        config,
        phase_generator(config, "denoiser"),
        checkpoint=checkpoint,
    )


def predict(cascade, inputs: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Run a network or cascade over ``inputs`` in batches without building graphs for training"""
    outputs = [cascade(inputs[start : start + batch_size]).data for start in range(0, len(inputs), batch_size)]
    return np.concatenate(outputs, axis=0)

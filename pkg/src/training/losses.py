"""Training objectives of the coupled network.

``mse`` fits reconstructions to the images; ``mse-l1`` adds a weighted l1
term on the reconstruction residual; ``mse-ae`` adds the reconstruction
errors of both autoencoders evaluated with the jointly trained weights.
"""

import numpy as np

from ..architectures.composite import ReconstructionModel
from ..autodiff.functional import l1_loss, mse_loss
from ..autodiff.tensor import Tensor, as_tensor
from ..config import TrainConfig
from ..errors import InvalidParameterError

LOSS_VARIANTS = ("mse", "mse-l1", "mse-ae")


def coupled_loss(model: ReconstructionModel, inputs: np.ndarray, targets: np.ndarray, config: TrainConfig) -> Tensor:
    """
    Loss of one batch.

    Args:
        model: networks of the architecture being trained
        inputs: normalized readings (B, M)
        targets: normalized images (B, 1, H, W)
        config: selects the variant, the l1 weight and its signed form
    """
    variant = config.loss_variant
    if variant not in LOSS_VARIANTS:
        raise InvalidParameterError("Unknown loss variant", variant=variant)

    y = as_tensor(inputs)
    prediction = model.reconstructor()(y)
    loss = mse_loss(prediction, targets)

    if variant == "mse-l1" and config.l1_weight > 0:
        loss = loss + config.l1_weight * l1_loss(prediction, targets, signed=config.l1_signed)
    elif variant == "mse-ae":
        data_ae = model["data_decoder"](model["data_encoder"](y))
        signal_ae = model["signal_decoder"](model["signal_encoder"](as_tensor(targets)))
        loss = loss + mse_loss(data_ae, inputs) + mse_loss(signal_ae, targets)
    return loss


def trainable_networks(model: ReconstructionModel, variant: str):
    """Networks whose weights a coupled loss variant updates"""
    names = [stage.name for stage in model.reconstructor().stages]
    if variant == "mse-ae":
        names += ["data_decoder", "signal_encoder"]
    return [model[name] for name in names]

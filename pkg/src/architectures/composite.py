"""Cascades of trained networks and the model bundle used by training."""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ..autodiff.tensor import Tensor, as_tensor
from ..errors import ArchitectureError
from ..utils.logging import get_logger
from ..utils.rng import generator, splitmix64
from .networks import (
    IMAGE_SHAPE,
    LATENT_SIZE,
    N_MEASUREMENTS,
    NetworkSpec,
    build_bridge,
    build_data_ae,
    build_denoiser,
    build_signal_ae_conv,
    build_signal_ae_fc,
    conv_latent_shape,
)

logger = get_logger(__name__)

ARCHITECTURES = ("mod-dot-fc", "mod-dot-conv", "e2e-fc", "e2e-conv")

MOD_DOT_CONV_COUNT = 7_712_426
MOD_DOT_FC_COUNT = 10_274_817


class Cascade:
    """Networks applied one after the other"""

    def __init__(self, name: str, stages: List[NetworkSpec]):
        for left, right in zip(stages, stages[1:]):
            if tuple(left.output_shape) != tuple(right.input_shape):
                raise ArchitectureError(
                    "Adjacent networks disagree on the latent shape",
                    left=left.name,
                    right=right.name,
                    produced=left.output_shape,
                    expected=right.input_shape,
                )
        self.name = name
        self.stages = list(stages)

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return tuple(self.stages[0].input_shape)

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return tuple(self.stages[-1].output_shape)

    def __call__(self, x) -> Tensor:
        x = as_tensor(x)
        for stage in self.stages:
            x = stage(x)
        return x

    def without(self, name: str) -> "Cascade":
        return Cascade(self.name, [s for s in self.stages if s.name != name])

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        for stage in self.stages:
            yield from stage.named_parameters()

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(stage.parameter_count() for stage in self.stages)


def compose_mod_dot(
    data_encoder: NetworkSpec,
    bridge: NetworkSpec,
    signal_decoder: NetworkSpec,
    denoiser: Optional[NetworkSpec] = None,
) -> Cascade:
    """signal_decoder o bridge o data_encoder, optionally followed by the denoiser"""
    stages = [data_encoder, bridge, signal_decoder] + ([denoiser] if denoiser is not None else [])
    return Cascade("mod-dot", stages)


def compose_e2e(data_encoder: NetworkSpec, signal_decoder: NetworkSpec, denoiser: Optional[NetworkSpec] = None) -> Cascade:
    """signal_decoder o data_encoder, optionally followed by the denoiser"""
    stages = [data_encoder, signal_decoder] + ([denoiser] if denoiser is not None else [])
    return Cascade("e2e", stages)


@dataclass(eq=False)
class ReconstructionModel:
    """
    Every network of one architecture.

    The autoencoder halves are kept for pretraining and for the coupled loss
    with autoencoder control terms; ``bridge`` is None for the e2e variants.
    """

    architecture: str
    networks: Dict[str, NetworkSpec]
    image_shape: Tuple[int, int]
    n_measurements: int
    latent_size: int

    @property
    def uses_bridge(self) -> bool:
        return "bridge" in self.networks

    @property
    def signal_kind(self) -> str:
        return self.architecture.rsplit("-", 1)[-1]

    def __getitem__(self, name: str) -> NetworkSpec:
        return self.networks[name]

    def reconstructor(self) -> Cascade:
        """Sinogram to image, without the denoiser"""
        n = self.networks
        if self.uses_bridge:
            return compose_mod_dot(n["data_encoder"], n["bridge"], n["signal_decoder"])
        return compose_e2e(n["data_encoder"], n["signal_decoder"])

    def inference(self) -> Cascade:
        """Sinogram to image including the denoiser when one is present"""
        cascade = self.reconstructor()
        if "denoiser" in self.networks:
            return Cascade(cascade.name, cascade.stages + [self.networks["denoiser"]])
        return cascade

    def add_denoiser(self, seed: int = 0, dtype=np.float32) -> NetworkSpec:
        self.networks["denoiser"] = build_denoiser(self.image_shape, generator(splitmix64(seed, 5)), dtype)
        return self.networks["denoiser"]

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        for spec in self.networks.values():
            yield from spec.named_parameters()

    def parameter_dict(self) -> Dict[str, Tensor]:
        return dict(self.named_parameters())

    def inference_parameter_count(self) -> int:
        """Parameters used from sinogram to final image, denoiser included"""
        return self.inference().parameter_count()


def build_model(
    architecture: str,
    image_shape: Tuple[int, int] = IMAGE_SHAPE,
    n_measurements: int = N_MEASUREMENTS,
    latent_size: int = LATENT_SIZE,
    seed: int = 0,
    dtype=np.float32,
    denoiser: bool = False,
) -> ReconstructionModel:
    """
    Build all networks of an architecture with independent seeded initializations.

    For the convolutional variants the latent size is fixed by the image
    shape, (4, H/4, W/4) flattened row-major.

    Raises:
        ArchitectureError: unknown architecture or inconsistent sizes
    """
    if architecture not in ARCHITECTURES:
        raise ArchitectureError("Unknown architecture", architecture=architecture, known=", ".join(ARCHITECTURES))
    image_shape = tuple(image_shape)
    kind = architecture.rsplit("-", 1)[-1]
    if kind == "conv":
        conv_latent = int(np.prod(conv_latent_shape(image_shape)))
        if conv_latent != latent_size:
            logger.info("Latent size follows the convolutional bottleneck", extra={"requested": latent_size, "used": conv_latent})
        latent_size = conv_latent

    rngs = [generator(splitmix64(seed, k)) for k in range(5)]
    data_encoder, data_decoder = build_data_ae(n_measurements, latent_size, rngs[0], dtype)
    if kind == "conv":
        signal_encoder, signal_decoder = build_signal_ae_conv(image_shape, rngs[1], dtype)
    else:
        signal_encoder, signal_decoder = build_signal_ae_fc(image_shape, latent_size, rngs[1], dtype)
    networks = {
        "data_encoder": data_encoder,
        "data_decoder": data_decoder,
        "signal_encoder": signal_encoder,
        "signal_decoder": signal_decoder,
    }
    if architecture.startswith("mod-dot"):
        networks["bridge"] = build_bridge(latent_size, rng=rngs[2], dtype=dtype)

    model = ReconstructionModel(architecture, networks, image_shape, n_measurements, latent_size)
    if denoiser:
        model.add_denoiser(seed, dtype)

    defaults = (image_shape, n_measurements, latent_size) == (IMAGE_SHAPE, N_MEASUREMENTS, LATENT_SIZE)
    if denoiser and model.uses_bridge and defaults:
        reference = MOD_DOT_CONV_COUNT if kind == "conv" else MOD_DOT_FC_COUNT
        if model.inference_parameter_count() != reference:
            raise ArchitectureError(
                "Composite parameter count differs from the reference count",
                architecture=architecture,
                declared=reference,
                actual=model.inference_parameter_count(),
            )
    logger.info(
        "Model built",
        extra={"architecture": architecture, "parameters": sum(s.parameter_count() for s in networks.values())},
    )
    return model

"""Builders for the reconstruction networks.

Every builder returns a NetworkSpec whose parameter count is checked against
the declared count when the network is constructed. With the default sizes
(3800 readings, 40 x 80 images, 800 latent values) the declared counts are
the reference ones below.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ..autodiff.layers import (
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    Linear,
    MaxPool2d,
    ReLU,
    Reshape,
    Sequential,
    Sigmoid,
    Tanh,
)
from ..autodiff.tensor import Tensor
from ..errors import ArchitectureError
from ..schemas.manifest import NetworkRecord

N_MEASUREMENTS = 19 * 200
IMAGE_SHAPE = (40, 80)
LATENT_SIZE = 800
BRIDGE_DEPTH = 7

# Parameter counts at the default sizes
DATA_ENCODER_COUNT = 3_040_800
DATA_DECODER_COUNT = 3_043_800
DATA_AE_COUNT = 6_084_600
BRIDGE_COUNT = 4_485_600
CONV_ENCODER_COUNT = 1612
CONV_DECODER_COUNT = 809
CONV_SIGNAL_AE_COUNT = 2421
FC_ENCODER_COUNT = 2_560_800
FC_DECODER_COUNT = 2_563_200
DENOISER_COUNT = 185_217


def fc_count(n_in: int, n_out: int) -> int:
    return n_in * n_out + n_out


def conv_count(c_in: int, c_out: int, k: int) -> int:
    return c_out * (c_in * k * k + 1)


def conv_transpose_count(c_in: int, c_out: int, k: int) -> int:
    return c_in * c_out * k * k + c_out


@dataclass(eq=False)
class NetworkSpec:
    """
    A named sequential network with its declared shapes and parameter count.

    Construction fails with ArchitectureError when the layers disagree with
    the declaration.
    """

    name: str
    module: Sequential
    input_shape: Tuple[int, ...]
    output_shape: Tuple[int, ...]
    declared_count: int
    layer_shapes: Tuple[Tuple[int, ...], ...] = field(init=False)

    def __post_init__(self):
        actual = self.module.parameter_count()
        if actual != self.declared_count:
            raise ArchitectureError(
                "Parameter count differs from the declared count",
                network=self.name,
                declared=self.declared_count,
                actual=actual,
            )
        shapes = []
        shape = (-1,) + tuple(self.input_shape)
        for layer in self.module:
            shape = layer.output_shape(shape)
            shapes.append(shape)
        if shape[1:] != tuple(self.output_shape):
            raise ArchitectureError(
                "Output shape differs from the declared shape",
                network=self.name,
                declared=self.output_shape,
                actual=shape[1:],
            )
        self.layer_shapes = tuple(shapes)

    def __call__(self, x) -> Tensor:
        return self.module(x)

    def parameter_count(self) -> int:
        return self.module.parameter_count()

    def named_parameters(self):
        for name, p in self.module.named_parameters():
            yield f"{self.name}.{name}", p

    def parameters(self):
        return self.module.parameters()

    def record(self) -> NetworkRecord:
        return NetworkRecord(
            name=self.name,
            input_shape=list(self.input_shape),
            output_shape=list(self.output_shape),
            parameter_count=self.parameter_count(),
            layers=self.module.records((-1,) + tuple(self.input_shape)),
        )


def _declared(reference: int, formula: int, default_sizes: bool) -> int:
    return reference if default_sizes else formula


def _rng(rng: Optional[np.random.Generator]) -> np.random.Generator:
    return rng if rng is not None else np.random.default_rng(0)


def build_data_ae(
    n_measurements: int = N_MEASUREMENTS,
    latent_size: int = LATENT_SIZE,
    rng: Optional[np.random.Generator] = None,
    dtype=np.float32,
) -> Tuple[NetworkSpec, NetworkSpec]:
    """Data encoder (one FC layer with tanh) and decoder (one FC layer with sigmoid)"""
    default = (n_measurements, latent_size) == (N_MEASUREMENTS, LATENT_SIZE)
    rng = _rng(rng)
    encoder = NetworkSpec(
        "data_encoder",
        Sequential([Linear(n_measurements, latent_size, rng, dtype), Tanh()]),
        (n_measurements,),
        (latent_size,),
        _declared(DATA_ENCODER_COUNT, fc_count(n_measurements, latent_size), default),
    )
    decoder = NetworkSpec(
        "data_decoder",
        Sequential([Linear(latent_size, n_measurements, rng, dtype), Sigmoid()]),
        (latent_size,),
        (n_measurements,),
        _declared(DATA_DECODER_COUNT, fc_count(latent_size, n_measurements), default),
    )
    return encoder, decoder


def conv_latent_shape(image_shape: Tuple[int, int] = IMAGE_SHAPE) -> Tuple[int, int, int]:
    """Bottleneck of the convolutional signal autoencoder, (4, H/4, W/4)"""
    ny, nx = image_shape
    if ny % 4 or nx % 4:
        raise ArchitectureError("Convolutional autoencoder needs image sides divisible by 4", image_shape=image_shape)
    return (4, ny // 4, nx // 4)


def build_signal_ae_conv(
    image_shape: Tuple[int, int] = IMAGE_SHAPE,
    rng: Optional[np.random.Generator] = None,
    dtype=np.float32,
) -> Tuple[NetworkSpec, NetworkSpec]:
    """
    Convolutional image encoder and decoder.

    The encoder flattens its (4, H/4, W/4) bottleneck row-major into the
    latent vector and the decoder reshapes it back.
    """
    rng = _rng(rng)
    latent_shape = conv_latent_shape(image_shape)
    latent = int(np.prod(latent_shape))
    encoder = NetworkSpec(
        "signal_encoder",
        Sequential(
            [
                Conv2d(1, 16, 3, 1, 1, rng, dtype),
                ReLU(),
                MaxPool2d(2, 2),
                Conv2d(16, 8, 3, 1, 1, rng, dtype),
                ReLU(),
                MaxPool2d(2, 2),
                Conv2d(8, 4, 3, 1, 1, rng, dtype),
                ReLU(),
                Reshape(latent),
            ]
        ),
        (1,) + tuple(image_shape),
        (latent,),
        _declared(CONV_ENCODER_COUNT, conv_count(1, 16, 3) + conv_count(16, 8, 3) + conv_count(8, 4, 3), True),
    )
    decoder = NetworkSpec(
        "signal_decoder",
        Sequential(
            [
                Reshape(*latent_shape),
                ConvTranspose2d(4, 8, 2, 2, 0, rng, dtype),
                ReLU(),
                ConvTranspose2d(8, 16, 2, 2, 0, rng, dtype),
                ReLU(),
                ConvTranspose2d(16, 1, 3, 1, 1, rng, dtype),
                Sigmoid(),
            ]
        ),
        (latent,),
        (1,) + tuple(image_shape),
        _declared(
            CONV_DECODER_COUNT,
            conv_transpose_count(4, 8, 2) + conv_transpose_count(8, 16, 2) + conv_transpose_count(16, 1, 3),
            True,
        ),
    )
    return encoder, decoder


def build_signal_ae_fc(
    image_shape: Tuple[int, int] = IMAGE_SHAPE,
    latent_size: int = LATENT_SIZE,
    rng: Optional[np.random.Generator] = None,
    dtype=np.float32,
) -> Tuple[NetworkSpec, NetworkSpec]:
    """Fully connected image encoder (tanh) and decoder (sigmoid)"""
    rng = _rng(rng)
    n_pixels = int(np.prod(image_shape))
    default = (tuple(image_shape), latent_size) == (IMAGE_SHAPE, LATENT_SIZE)
    encoder = NetworkSpec(
        "signal_encoder",
        Sequential([Reshape(n_pixels), Linear(n_pixels, latent_size, rng, dtype), Tanh()]),
        (1,) + tuple(image_shape),
        (latent_size,),
        _declared(FC_ENCODER_COUNT, fc_count(n_pixels, latent_size), default),
    )
    decoder = NetworkSpec(
        "signal_decoder",
        Sequential([Linear(latent_size, n_pixels, rng, dtype), Sigmoid(), Reshape(1, *image_shape)]),
        (latent_size,),
        (1,) + tuple(image_shape),
        _declared(FC_DECODER_COUNT, fc_count(latent_size, n_pixels), default),
    )
    return encoder, decoder


def build_bridge(
    latent_size: int = LATENT_SIZE,
    depth: int = BRIDGE_DEPTH,
    rng: Optional[np.random.Generator] = None,
    dtype=np.float32,
) -> NetworkSpec:
    """``depth`` square FC layers with tanh between the two latent spaces"""
    rng = _rng(rng)
    layers = []
    for _ in range(depth):
        layers += [Linear(latent_size, latent_size, rng, dtype), Tanh()]
    declared = _declared(
        BRIDGE_COUNT, depth * fc_count(latent_size, latent_size), (latent_size, depth) == (LATENT_SIZE, BRIDGE_DEPTH)
    )
    return NetworkSpec("bridge", Sequential(layers), (latent_size,), (latent_size,), declared)


def build_denoiser(
    image_shape: Tuple[int, int] = IMAGE_SHAPE,
    rng: Optional[np.random.Generator] = None,
    dtype=np.float32,
) -> NetworkSpec:
    """Shape-preserving convolutional post-processor"""
    rng = _rng(rng)
    channels = [1, 32, 64, 128]
    layers = []
    declared = 0
    for c_in, c_out in zip(channels, channels[1:]):
        layers += [Conv2d(c_in, c_out, 3, 1, 1, rng, dtype), LeakyReLU()]
        declared += conv_count(c_in, c_out, 3)
    back = channels[::-1]
    for c_in, c_out in zip(back, back[1:]):
        layers += [ConvTranspose2d(c_in, c_out, 3, 1, 1, rng, dtype), LeakyReLU()]
        declared += conv_transpose_count(c_in, c_out, 3)
    shape = (1,) + tuple(image_shape)
    return NetworkSpec("denoiser", Sequential(layers), shape, shape, _declared(DENOISER_COUNT, declared, True))

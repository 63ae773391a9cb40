"""Layer vocabulary of the reconstruction networks.

Shapes follow the (N, C, H, W) convention for image layers and (N, F) for
fully connected ones. Weights are drawn uniform in +/- 1/sqrt(fan_in).
"""

from abc import ABC, abstractmethod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ArchitectureError, ShapeMismatchError
from ..schemas.manifest import LayerRecord
from . import functional as F
from .tensor import Tensor, as_tensor

Shape = Tuple[int, ...]


def _uniform(rng: np.random.Generator, shape: Shape, fan_in: int, dtype) -> Tensor:
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape).astype(dtype), requires_grad=True)


class Module(ABC):
    """Base class for layers and layer containers"""

    kind: str = "module"

    @abstractmethod
    def forward(self, x: Tensor) -> Tensor:
        """Apply the layer"""

    @abstractmethod
    def output_shape(self, input_shape: Shape) -> Shape:
        """Shape produced from ``input_shape`` (batch axis as -1 allowed)"""

    def __call__(self, x) -> Tensor:
        return self.forward(as_tensor(x))

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(())

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def hyperparameters(self) -> Dict[str, object]:
        return {}

    def describe(self, input_shape: Shape) -> LayerRecord:
        return LayerRecord(
            kind=self.kind,
            params=self.hyperparameters(),
            output_shape=list(self.output_shape(input_shape)),
            parameter_count=self.parameter_count(),
        )

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.hyperparameters().items())
        return f"{type(self).__name__}({args})"


class Linear(Module):
    kind = "fc"

    def __init__(self, in_features: int, out_features: int, rng: Optional[np.random.Generator] = None, dtype=np.float32):
        rng = rng or np.random.default_rng(0)
        self.in_features = in_features
        self.out_features = out_features
        self.weight = _uniform(rng, (out_features, in_features), in_features, dtype)
        self.bias = _uniform(rng, (out_features,), in_features, dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)

    def output_shape(self, input_shape: Shape) -> Shape:
        if input_shape[-1] != self.in_features:
            raise ShapeMismatchError("Linear input features mismatch", expected=self.in_features, got=input_shape)
        return tuple(input_shape[:-1]) + (self.out_features,)

    def named_parameters(self):
        yield "weight", self.weight
        yield "bias", self.bias

    def hyperparameters(self):
        return {"in": self.in_features, "out": self.out_features}


def _conv_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


class Conv2d(Module):
    kind = "conv2d"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 3,
        stride: int = 1,
        padding: int = 0,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32,
    ):
        rng = rng or np.random.default_rng(0)
        self.in_channels, self.out_channels = in_channels, out_channels
        self.kernel_size, self.stride, self.padding = kernel_size, stride, padding
        fan_in = in_channels * kernel_size**2
        self.weight = _uniform(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in, dtype)
        self.bias = _uniform(rng, (out_channels,), fan_in, dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)

    def output_shape(self, input_shape: Shape) -> Shape:
        n, c, h, w = input_shape
        if c != self.in_channels:
            raise ShapeMismatchError("Conv2d channel mismatch", expected=self.in_channels, got=c)
        k, s, p = self.kernel_size, self.stride, self.padding
        return (n, self.out_channels, _conv_size(h, k, s, p), _conv_size(w, k, s, p))

    def named_parameters(self):
        yield "weight", self.weight
        yield "bias", self.bias

    def hyperparameters(self):
        return {
            "in": self.in_channels,
            "out": self.out_channels,
            "kernel": self.kernel_size,
            "stride": self.stride,
            "padding": self.padding,
        }


class ConvTranspose2d(Conv2d):
    kind = "conv_transpose2d"

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = 2,
        stride: int = 1,
        padding: int = 0,
        rng: Optional[np.random.Generator] = None,
        dtype=np.float32,
    ):
        rng = rng or np.random.default_rng(0)
        self.in_channels, self.out_channels = in_channels, out_channels
        self.kernel_size, self.stride, self.padding = kernel_size, stride, padding
        # weight layout (C_in, C_out, k, k); fan_in counted on the output side
        fan_in = out_channels * kernel_size**2
        self.weight = _uniform(rng, (in_channels, out_channels, kernel_size, kernel_size), fan_in, dtype)
        self.bias = _uniform(rng, (out_channels,), fan_in, dtype)

    def forward(self, x: Tensor) -> Tensor:
        return F.conv_transpose2d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)

    def output_shape(self, input_shape: Shape) -> Shape:
        n, c, h, w = input_shape
        if c != self.in_channels:
            raise ShapeMismatchError("ConvTranspose2d channel mismatch", expected=self.in_channels, got=c)
        k, s, p = self.kernel_size, self.stride, self.padding
        return (n, self.out_channels, (h - 1) * s - 2 * p + k, (w - 1) * s - 2 * p + k)


class MaxPool2d(Module):
    kind = "max_pool2d"

    def __init__(self, kernel_size: int = 2, stride: Optional[int] = None, dilation: int = 1):
        if dilation != 1:
            raise ArchitectureError("MaxPool2d supports dilation 1 only", dilation=dilation)
        self.kernel_size = kernel_size
        self.stride = stride or kernel_size
        self.dilation = dilation

    def forward(self, x: Tensor) -> Tensor:
        return F.max_pool2d(x, self.kernel_size, self.stride, self.dilation)

    def output_shape(self, input_shape: Shape) -> Shape:
        n, c, h, w = input_shape
        k, s = self.kernel_size, self.stride
        return (n, c, _conv_size(h, k, s, 0), _conv_size(w, k, s, 0))

    def hyperparameters(self):
        return {"kernel": self.kernel_size, "stride": self.stride, "dilation": self.dilation}


class _Activation(Module):
    def output_shape(self, input_shape: Shape) -> Shape:
        return tuple(input_shape)


class Tanh(_Activation):
    kind = "tanh"

    def forward(self, x: Tensor) -> Tensor:
        return F.tanh(x)


class Sigmoid(_Activation):
    kind = "sigmoid"

    def forward(self, x: Tensor) -> Tensor:
        return F.sigmoid(x)


class ReLU(_Activation):
    kind = "relu"

    def forward(self, x: Tensor) -> Tensor:
        return F.relu(x)


class LeakyReLU(_Activation):
    kind = "leaky_relu"

    def __init__(self, slope: float = 0.01):
        self.slope = slope

    def forward(self, x: Tensor) -> Tensor:
        return F.leaky_relu(x, self.slope)

    def hyperparameters(self):
        return {"slope": self.slope}


class Reshape(Module):
    """Row-major reshape of every sample; the batch axis is kept"""

    kind = "reshape"

    def __init__(self, *shape: int):
        self.shape = tuple(shape)

    def forward(self, x: Tensor) -> Tensor:
        return x.reshape((x.shape[0],) + self.shape)

    def output_shape(self, input_shape: Shape) -> Shape:
        if int(np.prod(input_shape[1:])) != int(np.prod(self.shape)):
            raise ShapeMismatchError("Reshape changes the sample size", input=input_shape, target=self.shape)
        return (input_shape[0],) + self.shape

    def hyperparameters(self):
        return {"shape": list(self.shape)}


class Sequential(Module):
    """Ordered composition of modules; parameters are named ``<index>.<name>``"""

    kind = "sequential"

    def __init__(self, layers: Sequence[Module]):
        self.layers = list(layers)

    def __iter__(self):
        return iter(self.layers)

    def __len__(self) -> int:
        return len(self.layers)

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer(x)
        return x

    def output_shape(self, input_shape: Shape) -> Shape:
        shape = tuple(input_shape)
        for layer in self.layers:
            shape = layer.output_shape(shape)
        return shape

    def named_parameters(self):
        for index, layer in enumerate(self.layers):
            for name, p in layer.named_parameters():
                yield f"{index}.{name}", p

    def records(self, input_shape: Shape) -> List[LayerRecord]:
        records = []
        shape = tuple(input_shape)
        for layer in self.layers:
            records.append(layer.describe(shape))
            shape = layer.output_shape(shape)
        return records

    def __repr__(self) -> str:
        inner = ", ".join(repr(layer) for layer in self.layers)
        return f"Sequential({inner})"

import numpy as np
import pytest

from src.autodiff import (
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    Linear,
    MaxPool2d,
    Reshape,
    Sequential,
    Sigmoid,
    Tanh,
    Tensor,
    gradcheck,
)
from src.errors import ArchitectureError, ShapeMismatchError


def test_linear_layer():
    """Test parameter shapes, count and initialization bound"""
    layer = Linear(100, 7, rng=np.random.default_rng(0))
    assert layer.weight.shape == (7, 100)
    assert layer.parameter_count() == 707
    assert np.abs(layer.weight.data).max() <= 0.1
    assert layer.weight.dtype == np.float32
    assert layer.output_shape((5, 100)) == (5, 7)
    with pytest.raises(ShapeMismatchError):
        layer.output_shape((5, 99))


def test_conv_layers_shapes_and_counts():
    """Test convolution output shapes and parameter counts"""
    conv = Conv2d(1, 4, 3, padding=1)
    assert conv.parameter_count() == 4 * 9 + 4
    assert conv.output_shape((2, 1, 40, 80)) == (2, 4, 40, 80)
    assert conv(np.zeros((2, 1, 40, 80), dtype=np.float32)).shape == (2, 4, 40, 80)

    up = ConvTranspose2d(4, 2, 2, stride=2)
    assert up.weight.shape == (4, 2, 2, 2)
    assert up.parameter_count() == 4 * 2 * 4 + 2
    assert up.output_shape((1, 4, 10, 20)) == (1, 2, 20, 40)
    # fan_in of a transposed convolution counts output channels
    assert np.abs(up.weight.data).max() <= 1.0 / np.sqrt(2 * 4)

    pool = MaxPool2d(2)
    assert pool.output_shape((1, 4, 40, 80)) == (1, 4, 20, 40)
    assert pool.parameter_count() == 0
    with pytest.raises(ArchitectureError):
        MaxPool2d(2, dilation=2)
    with pytest.raises(ShapeMismatchError):
        conv.output_shape((1, 2, 8, 8))


def test_reshape_keeps_batch():
    """Test row-major per-sample reshape"""
    layer = Reshape(4, 10, 20)
    x = Tensor(np.arange(2 * 800, dtype=np.float32).reshape(2, 800))
    out = layer(x)
    assert out.shape == (2, 4, 10, 20)
    assert out.data[1, 0, 0, 1] == 801
    assert layer.output_shape((2, 800)) == (2, 4, 10, 20)
    with pytest.raises(ShapeMismatchError):
        layer.output_shape((2, 799))


def test_sequential_naming_and_records():
    """Test parameter names and layer records of a container"""
    rng = np.random.default_rng(0)
    net = Sequential([Linear(6, 4, rng), Tanh(), Linear(4, 2, rng), Sigmoid()])
    names = [name for name, _ in net.named_parameters()]
    assert names == ["0.weight", "0.bias", "2.weight", "2.bias"]
    assert net.parameter_count() == 6 * 4 + 4 + 4 * 2 + 2
    records = net.records((1, 6))
    assert [r.kind for r in records] == ["fc", "tanh", "fc", "sigmoid"]
    assert records[0].params == {"in": 6, "out": 4}
    assert records[-1].output_shape == [1, 2]
    assert len(net) == 4
    assert "Linear(in=6, out=4)" in repr(net)


def test_sequential_gradients():
    """Test end-to-end gradients of a small conv stack in float64"""
    rng = np.random.default_rng(1)
    net = Sequential(
        [
            Conv2d(1, 2, 3, padding=1, rng=rng, dtype=np.float64),
            LeakyReLU(),
            MaxPool2d(2),
            ConvTranspose2d(2, 1, 2, stride=2, rng=rng, dtype=np.float64),
            Sigmoid(),
        ]
    )
    x = Tensor(rng.standard_normal((2, 1, 4, 6)), dtype=np.float64)
    assert net(x).shape == (2, 1, 4, 6)
    assert gradcheck(lambda: (net(x) ** 2).sum(), net.parameters())


def test_zero_grad():
    """Test clearing gradients of every parameter"""
    net = Sequential([Linear(3, 2, dtype=np.float64)])
    net(np.ones((1, 3))).sum().backward()
    assert all(p.grad is not None for p in net.parameters())
    net.zero_grad()
    assert all(p.grad is None for p in net.parameters())


def test_same_seed_same_weights():
    """Test deterministic initialization"""
    a = Conv2d(2, 3, 3, rng=np.random.default_rng(9))
    b = Conv2d(2, 3, 3, rng=np.random.default_rng(9))
    assert np.array_equal(a.weight.data, b.weight.data)

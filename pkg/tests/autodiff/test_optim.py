import numpy as np
import pytest

from src.autodiff import Adam, Linear, Tensor, mse_loss
from src.errors import ShapeMismatchError


def test_first_step_moves_by_lr():
    """Test that the bias-corrected first step has magnitude lr"""
    p = Tensor(np.array([1.0, -1.0, 2.0]), requires_grad=True, dtype=np.float64)
    optimizer = Adam([p], lr=0.1)
    (p * np.array([3.0, -0.5, 1e-3])).sum().backward()
    optimizer.step()
    assert np.allclose(p.data, [0.9, -0.9, 1.9], atol=1e-6)
    assert optimizer.t == 1


def test_missing_gradient_is_zero():
    """Test parameters without a gradient stay put"""
    p = Tensor(np.ones(2), requires_grad=True, dtype=np.float64)
    optimizer = Adam([p], lr=0.1)
    optimizer.step()
    assert np.array_equal(p.data, np.ones(2))


def test_adam_fits_a_linear_model():
    """Test convergence on least squares"""
    rng = np.random.default_rng(0)
    x = rng.standard_normal((64, 3))
    y = x @ np.array([[1.0], [-2.0], [0.5]])
    layer = Linear(3, 1, rng, dtype=np.float64)
    optimizer = Adam(layer.parameters(), lr=0.05)
    for _ in range(500):
        optimizer.zero_grad()
        loss = mse_loss(layer(x), y)
        loss.backward()
        optimizer.step()
    assert loss.item() < 1e-4


def test_state_round_trip():
    """Test that saved moments resume the same trajectory"""
    def make():
        p = Tensor(np.array([0.5, -0.25]), requires_grad=True, dtype=np.float64)
        return p, Adam([p], lr=0.01)

    def step(p, optimizer):
        optimizer.zero_grad()
        ((p - 3.0) ** 2).sum().backward()
        optimizer.step()

    p1, opt1 = make()
    for _ in range(3):
        step(p1, opt1)
    p2, opt2 = make()
    p2.data[:] = p1.data
    opt2.load_state(opt1.hyperparameters(), {k: v.copy() for k, v in opt1.moments().items()})
    step(p1, opt1)
    step(p2, opt2)
    assert opt2.t == 4
    assert np.array_equal(p1.data, p2.data)
    assert set(opt1.moments()) == {"m.0", "v.0"}


def test_load_state_shape_mismatch():
    """Test restoring moments of another model"""
    p = Tensor(np.ones(3), requires_grad=True)
    optimizer = Adam([p])
    with pytest.raises(ShapeMismatchError):
        optimizer.load_state({}, {"m.0": np.zeros(2), "v.0": np.zeros(2)})

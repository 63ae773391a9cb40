from typing import Callable, Optional, Sequence

import numpy as np

from .tensor import Tensor


def numerical_gradient(fn: Callable[[], Tensor], tensor: Tensor, step: float = 1e-6) -> np.ndarray:
    """Central differences of the scalar ``fn()`` with respect to ``tensor.data``"""
    grad = np.zeros_like(tensor.data, dtype=np.float64)
    flat = tensor.data.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + step
        plus = fn().item()
        flat[i] = original - step
        minus = fn().item()
        flat[i] = original
        grad.reshape(-1)[i] = (plus - minus) / (2.0 * step)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), floor)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def gradcheck(
    fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    step: float = 1e-6,
    tolerance: float = 1e-4,
    max_entries: Optional[int] = None,
) -> bool:
    """
    Compare backward gradients of a scalar function against central differences.

    Args:
        fn: closure recomputing the scalar output from ``tensors``
        tensors: float64 leaves requiring grad
        step: finite-difference step
        tolerance: maximum relative error accepted
        max_entries: only check tensors up to this many entries

    Returns:
        bool: True if every checked tensor agrees within ``tolerance``
    """
    for t in tensors:
        t.zero_grad()
    fn().backward()
    for t in tensors:
        if max_entries is not None and t.size > max_entries:
            continue
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        if relative_error(analytic, numerical_gradient(fn, t, step)) > tolerance:
            return False
    return True

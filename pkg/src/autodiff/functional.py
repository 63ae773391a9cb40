"""Differentiable layer operations on (N, C, H, W) and (N, F) tensors."""

from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import InvalidParameterError, ShapeMismatchError
from .tensor import Tensor, as_tensor


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """x @ weight.T + bias with weight shaped (out, in)"""
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError("Linear input mismatch", input=x.shape, weight=weight.shape)
    w = weight.data

    def backward(g):
        grads = [g @ w, g.T @ x.data]
        if bias is not None:
            grads.append(g.sum(axis=0))
        return grads

    parents = (x, weight) if bias is None else (x, weight, bias)
    out = x.data @ w.T
    if bias is not None:
        out = out + bias.data
    return Tensor(out, parents=parents, backward=backward, op="linear")


def _check_4d(x: Tensor, channels: int, name: str) -> None:
    if x.ndim != 4 or x.shape[1] != channels:
        raise ShapeMismatchError(f"{name} expects (N, {channels}, H, W)", got=x.shape)


def conv2d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, padding: int = 0) -> Tensor:
    """Cross-correlation with weight (C_out, C_in, k, k)"""
    c_out, c_in, k, _ = weight.shape
    _check_4d(x, c_in, "conv2d")
    p, s = padding, stride
    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p))) if p else x.data
    if xp.shape[2] < k or xp.shape[3] < k:
        raise ShapeMismatchError("conv2d input smaller than kernel", input=x.shape, kernel=k)
    windows = sliding_window_view(xp, (k, k), axis=(2, 3))[:, :, ::s, ::s]
    out_h, out_w = windows.shape[2], windows.shape[3]
    w = weight.data
    out = np.einsum("nchwij,ocij->nohw", windows, w, optimize=True)
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(g):
        grad_w = np.einsum("nchwij,nohw->ocij", windows, g, optimize=True)
        grad_xp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                grad_xp[:, :, i : i + s * out_h : s, j : j + s * out_w : s] += np.einsum(
                    "nohw,oc->nchw", g, w[:, :, i, j], optimize=True
                )
        grad_x = grad_xp[:, :, p : xp.shape[2] - p, p : xp.shape[3] - p] if p else grad_xp
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor(out, parents=parents, backward=backward, op="conv2d")


def conv_transpose2d(
    x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, padding: int = 0
) -> Tensor:
    """
    Transposed convolution with weight (C_in, C_out, k, k).

    Output size is (H - 1) * stride - 2 * padding + k.
    """
    c_in, c_out, k, _ = weight.shape
    _check_4d(x, c_in, "conv_transpose2d")
    n, _, h, w_in = x.shape
    p, s = padding, stride
    full_h, full_w = (h - 1) * s + k, (w_in - 1) * s + k
    if full_h - 2 * p < 1 or full_w - 2 * p < 1:
        raise ShapeMismatchError("conv_transpose2d padding removes the whole output", input=x.shape)
    w = weight.data
    full = np.zeros((n, c_out, full_h, full_w), dtype=np.result_type(x.data, w))
    for i in range(k):
        for j in range(k):
            full[:, :, i : i + s * h : s, j : j + s * w_in : s] += np.einsum(
                "nchw,co->nohw", x.data, w[:, :, i, j], optimize=True
            )
    out = full[:, :, p : full_h - p, p : full_w - p]
    if bias is not None:
        out = out + bias.data[None, :, None, None]

    def backward(g):
        grad_full = np.pad(g, ((0, 0), (0, 0), (p, p), (p, p))) if p else g
        grad_x = np.zeros_like(x.data)
        grad_w = np.zeros_like(w)
        for i in range(k):
            for j in range(k):
                patch = grad_full[:, :, i : i + s * h : s, j : j + s * w_in : s]
                grad_x += np.einsum("nohw,co->nchw", patch, w[:, :, i, j], optimize=True)
                grad_w[:, :, i, j] = np.einsum("nchw,nohw->co", x.data, patch, optimize=True)
        grads = [grad_x, grad_w]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor(np.ascontiguousarray(out), parents=parents, backward=backward, op="conv_transpose2d")


def max_pool2d(x: Tensor, kernel: int = 2, stride: Optional[int] = None, dilation: int = 1) -> Tensor:
    """Max pooling without padding; gradients flow to the first maximum of each window"""
    if dilation != 1:
        raise InvalidParameterError("Only dilation 1 is supported", dilation=dilation)
    if x.ndim != 4:
        raise ShapeMismatchError("max_pool2d expects (N, C, H, W)", got=x.shape)
    s = stride or kernel
    k = kernel
    windows = sliding_window_view(x.data, (k, k), axis=(2, 3))[:, :, ::s, ::s]
    n, c, out_h, out_w = windows.shape[:4]
    flat = windows.reshape(n, c, out_h, out_w, k * k)
    arg = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    def backward(g):
        grad_x = np.zeros_like(x.data)
        di, dj = np.divmod(arg, k)
        rows = np.arange(out_h)[None, None, :, None] * s + di
        cols = np.arange(out_w)[None, None, None, :] * s + dj
        nn = np.arange(n)[:, None, None, None]
        cc = np.arange(c)[None, :, None, None]
        np.add.at(grad_x, (nn, cc, rows, cols), g)
        return (grad_x,)

    return Tensor(out, parents=(x,), backward=backward, op="max_pool2d")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return Tensor(y, parents=(x,), backward=lambda g: (g * (1.0 - y * y),), op="tanh")


def sigmoid(x: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * x.data))
    return Tensor(y, parents=(x,), backward=lambda g: (g * y * (1.0 - y),), op="sigmoid")


def relu(x: Tensor) -> Tensor:
    positive = x.data > 0
    return Tensor(x.data * positive, parents=(x,), backward=lambda g: (g * positive,), op="relu")


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    factor = np.where(x.data > 0, 1.0, slope).astype(x.dtype)
    return Tensor(x.data * factor, parents=(x,), backward=lambda g: (g * factor,), op="leaky_relu")


def mse_loss(prediction: Tensor, target) -> Tensor:
    """Mean of squared differences over every element"""
    target = as_tensor(target, prediction.dtype)
    if prediction.shape != target.shape:
        raise ShapeMismatchError("Loss operands differ in shape", prediction=prediction.shape, target=target.shape)
    return ((prediction - target) ** 2).mean()


def l1_loss(prediction: Tensor, target, signed: bool = False) -> Tensor:
    """Mean absolute difference; ``signed`` keeps the plain mean difference"""
    target = as_tensor(target, prediction.dtype)
    if prediction.shape != target.shape:
        raise ShapeMismatchError("Loss operands differ in shape", prediction=prediction.shape, target=target.shape)
    diff = prediction - target
    return diff.mean() if signed else diff.abs().mean()

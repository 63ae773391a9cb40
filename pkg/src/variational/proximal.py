from typing import Optional, Tuple

import numpy as np


def soft_threshold(x: np.ndarray, threshold: float, nonnegative: bool = False) -> np.ndarray:
    shrunk = np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)
    return np.maximum(shrunk, 0.0) if nonnegative else shrunk


def lipschitz_estimate(gram: np.ndarray, n_iter: int = 100, seed: int = 0) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration"""
    v = np.random.default_rng(seed).standard_normal(gram.shape[0])
    estimate = 0.0
    for _ in range(n_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        estimate = float(v @ w / (v @ v))
        v = w / norm
    return estimate


def fista(
    gram: np.ndarray,
    c: np.ndarray,
    l1: float,
    shift: Optional[np.ndarray] = None,
    x0: Optional[np.ndarray] = None,
    lipschitz: Optional[float] = None,
    max_iter: int = 500,
    tol: float = 1e-8,
    nonnegative: bool = False,
) -> Tuple[np.ndarray, int, bool]:
    """
    FISTA with backtracking for 0.5 x'Gx - c'x - <shift, x> + l1 ||x||_1.

    The quadratic is the Gram form of 0.5 ||Jx - b||^2 with G = J'J and
    c = J'b (up to a constant). Stops when the relative change of the
    iterate falls below ``tol``.

    Returns:
        (x, iterations, converged)
    """
    n = len(c)
    linear = c if shift is None else c + shift
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    L = lipschitz if lipschitz else max(lipschitz_estimate(gram), 1e-12)

    def smooth(v):
        return 0.5 * v @ (gram @ v) - linear @ v

    y, t = x.copy(), 1.0
    for iteration in range(1, max_iter + 1):
        grad = gram @ y - linear
        fy = smooth(y)
        while True:
            candidate = soft_threshold(y - grad / L, l1 / L, nonnegative)
            step = candidate - y
            if smooth(candidate) <= fy + grad @ step + 0.5 * L * (step @ step) + 1e-15 * abs(fy):
                break
            L *= 2.0
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        change = np.linalg.norm(candidate - x)
        y = candidate + ((t - 1.0) / t_next) * (candidate - x)
        x, t = candidate, t_next
        if change <= tol * max(np.linalg.norm(x), 1e-12):
            return x, iteration, True
    return x, max_iter, False

"""Filtered-SVD reconstructions, the linear counterpart of the learned bridge."""

from typing import Optional, Tuple

import numpy as np

from ..errors import InvalidParameterError
from ..schemas.results import SolverInfo
from .result import Reconstruction

MODES = ("tikhonov", "tsvd")


def _numerical_rank_cutoff(singular_values: np.ndarray, shape: Tuple[int, int]) -> float:
    if singular_values.size == 0:
        return 0.0
    return float(singular_values.max() * max(shape) * np.finfo(float).eps)


def filter_factors(
    singular_values: np.ndarray,
    alpha: float = 0.0,
    mode: str = "tikhonov",
    rank: Optional[int] = None,
    cutoff: float = 0.0,
) -> np.ndarray:
    """
    Filter factors phi_i in [0, 1] for descending singular values.

    Tikhonov uses sigma^2 / (sigma^2 + alpha); truncated SVD keeps the first
    ``rank`` values. Singular values at or below ``cutoff`` always get 0.
    """
    s = np.asarray(singular_values, dtype=float)
    if mode == "tikhonov":
        if alpha < 0:
            raise InvalidParameterError("alpha must be non-negative", alpha=alpha)
        denom = s**2 + alpha
        phi = np.divide(s**2, denom, out=np.zeros_like(s), where=denom > 0)
    elif mode == "tsvd":
        k = len(s) if rank is None else rank
        if k < 0:
            raise InvalidParameterError("rank must be non-negative", rank=rank)
        phi = (np.arange(len(s)) < k).astype(float)
    else:
        raise InvalidParameterError("Unknown filter mode", mode=mode)
    return np.where(s > cutoff, phi, 0.0)


def svd_filter_solve(
    J: np.ndarray,
    b: np.ndarray,
    alpha: Optional[float] = None,
    mode: str = "tikhonov",
    rank: Optional[int] = None,
    alpha_fraction: float = 1e-4,
    background: float = 0.0,
) -> Reconstruction:
    """x = V diag(phi / sigma) U' b; alpha defaults to ``alpha_fraction * sigma_max^2``"""
    J = np.asarray(J, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    u, s, vt = np.linalg.svd(J, full_matrices=False)
    if alpha is None:
        alpha = alpha_fraction * float(s.max(initial=0.0)) ** 2 if mode == "tikhonov" else 0.0
    cutoff = _numerical_rank_cutoff(s, J.shape)
    phi = filter_factors(s, alpha, mode, rank, cutoff)
    gain = np.divide(phi, s, out=np.zeros_like(s), where=phi > 0)
    x = vt.T @ (gain * (u.T @ b))
    info = SolverInfo(
        method=mode,
        iterations=1,
        residual=float(np.linalg.norm(J @ x - b)),
        alpha=float(alpha),
        extra={"effective_rank": float(np.sum(phi))},
    )
    return Reconstruction(delta_mu=x, background=background, info=info)

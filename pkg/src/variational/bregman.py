"""Bregman iterations with an l1 regularizer.

Each outer step minimizes 0.5 ||J x - b||^2 + alpha (||x||_1 - <p, x>), then
moves the subgradient p <- p - J'(J x - b) / alpha. Iterations stop at the
discrepancy level tau * noise * sqrt(M) when the noise level is known.
"""

from typing import Optional

import numpy as np

from ..config import BregmanConfig
from ..errors import InvalidParameterError, ShapeMismatchError, SolverError
from ..schemas.results import SolverInfo
from ..utils.logging import get_logger
from ..utils.telemetry import SOLVER_ITERATIONS
from .proximal import fista, lipschitz_estimate
from .result import Reconstruction

logger = get_logger(__name__)


def default_alpha(J: np.ndarray, b: np.ndarray, fraction: float) -> float:
    """``fraction`` of the smallest alpha giving an all-zero lasso solution"""
    top = float(np.abs(J.T @ b).max(initial=0.0))
    return fraction * top if top > 0 else fraction


def bregman_solve(
    J: np.ndarray,
    b: np.ndarray,
    config: Optional[BregmanConfig] = None,
    background: float = 0.0,
) -> Reconstruction:
    """
    Run Bregman iterations and return the iterate chosen by the stopping rule.

    Args:
        J: (M, V) sensitivity matrix
        b: (M,) data
        config: alpha, iteration limits and discrepancy settings
        background: value added to the increment to report mu

    Returns:
        Reconstruction: with every outer iterate in ``history``
    """
    config = config or BregmanConfig()
    J = np.asarray(J, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if J.ndim != 2 or J.shape[0] != b.shape[0]:
        raise ShapeMismatchError("Jacobian rows and data length differ", rows=J.shape[0], data=b.shape[0])

    alpha = config.alpha if config.alpha is not None else default_alpha(J, b, config.alpha_fraction)
    if alpha <= 0:
        raise InvalidParameterError("alpha must be positive", alpha=alpha)

    gram = J.T @ J
    c = J.T @ b
    lipschitz = max(lipschitz_estimate(gram), 1e-12)
    discrepancy = None
    if config.noise_level is not None:
        discrepancy = config.tau * config.noise_level * np.sqrt(len(b))

    x = np.zeros(J.shape[1])
    p = np.zeros(J.shape[1])
    history, residuals = [], []
    total_inner = 0
    stopped_by_discrepancy = False
    for k in range(1, config.outer_iters + 1):
        x, inner, converged = fista(
            gram,
            c,
            alpha,
            shift=alpha * p,
            x0=x,
            lipschitz=lipschitz,
            max_iter=config.inner_max_iter,
            tol=config.inner_tol,
            nonnegative=config.nonnegative,
        )
        if not np.all(np.isfinite(x)):
            raise SolverError("Bregman inner solve diverged", outer=k)
        if not converged:
            logger.warning("Bregman inner solve hit its iteration limit", extra={"outer": k, "inner": inner})
        total_inner += inner

        residual_vector = J @ x - b
        p = p - (J.T @ residual_vector) / alpha
        residual = float(np.linalg.norm(residual_vector))
        history.append(x.copy())
        residuals.append(residual)
        logger.debug("Bregman step", extra={"outer": k, "residual": residual, "inner": inner})
        if discrepancy is not None and residual <= discrepancy:
            stopped_by_discrepancy = True
            break

    SOLVER_ITERATIONS.labels(method="bregman").inc(total_inner)
    info = SolverInfo(
        method="bregman",
        iterations=len(history),
        converged=stopped_by_discrepancy or discrepancy is None,
        residual=residuals[-1],
        alpha=float(alpha),
        extra={"inner_iterations": float(total_inner), "discrepancy": float(discrepancy or 0.0)},
    )
    return Reconstruction(delta_mu=x, background=background, info=info, history=history)

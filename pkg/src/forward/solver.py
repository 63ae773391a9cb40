"""Factorized sparse operators for repeated right-hand sides."""

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from ..errors import SolverError
from ..utils.logging import get_logger
from ..utils.telemetry import FACTORIZATION_LATENCY, FORWARD_SOLVES, timed

logger = get_logger(__name__)


class FactorizedOperator:
    """
    Solver for a fixed sparse SPD matrix.

    ``direct`` uses a sparse LU factorization computed once. ``cg`` runs
    conjugate gradients preconditioned by an incomplete LU factorization
    (``spilu``). SciPy ships no incomplete Cholesky, so ILU of the symmetric
    matrix takes its place.
    Every solution is checked against ``rtol`` in the relative residual.
    """

    def __init__(self, matrix: sparse.spmatrix, method: str = "direct", rtol: float = 1e-10, max_iter: int = 20000):
        if method not in ("direct", "cg"):
            raise SolverError("Unknown linear solver", method=method)
        self.matrix = sparse.csc_matrix(matrix)
        self.method = method
        self.rtol = rtol
        self.max_iter = max_iter

        with timed(FACTORIZATION_LATENCY):
            try:
                if method == "direct":
                    self._lu = spla.splu(self.matrix)
                else:
                    ilu = spla.spilu(self.matrix, drop_tol=1e-5, fill_factor=20)
                    self._preconditioner = spla.LinearOperator(self.matrix.shape, ilu.solve)
            except RuntimeError as e:
                raise SolverError(f"Factorization failed: {e}", n=self.matrix.shape[0]) from e

    @property
    def shape(self):
        return self.matrix.shape

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """
        Solve for one right-hand side (n,) or several (n, k)

        Raises:
            SolverError: when a relative residual exceeds ``rtol``
        """
        rhs = np.asarray(rhs, dtype=float)
        single = rhs.ndim == 1
        columns = rhs[:, None] if single else rhs

        if self.method == "direct":
            solution = self._lu.solve(np.ascontiguousarray(columns))
        else:
            solution = np.column_stack([self._cg(col) for col in columns.T]) if columns.shape[1] else columns.copy()
        FORWARD_SOLVES.labels(solver=self.method).inc(columns.shape[1])

        norms = np.linalg.norm(columns, axis=0)
        residuals = np.linalg.norm(self.matrix @ solution - columns, axis=0)
        relative = np.where(norms > 0, residuals / np.where(norms > 0, norms, 1.0), residuals)
        worst = float(relative.max()) if relative.size else 0.0
        if worst > self.rtol:
            logger.warning("Linear solve did not converge", extra={"residual": worst, "solver": self.method})
            raise SolverError("Linear solve did not reach the residual tolerance", residual=worst, rtol=self.rtol)

        return solution[:, 0] if single else solution

    def _cg(self, b: np.ndarray) -> np.ndarray:
        if not np.any(b):
            return np.zeros_like(b)
        x, info = spla.cg(
            self.matrix,
            b,
            rtol=self.rtol * 0.1,
            atol=0.0,
            maxiter=self.max_iter,
            M=self._preconditioner,
        )
        if info != 0:
            residual = float(np.linalg.norm(self.matrix @ x - b) / np.linalg.norm(b))
            logger.warning("CG stopped early", extra={"info": info, "residual": residual})
        return x

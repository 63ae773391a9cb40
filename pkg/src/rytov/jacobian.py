"""Rytov linearization of the log-amplitude data about the background medium.

For a perturbation of mu_a inside voxel v the first-order change of the log
reading of pair (s, d) is

    d log y[s, d] / d mu_v = -1 / y0[s, d] * integral over v of (U_s G_d - 3 D0^2 grad U_s . grad G_d)

where U_s is the background fluence of source s and G_d solves the same
operator with the detector's point functional as load, so the reading is
y0[s, d] = <f_s, G_d>. G_d carries the operator's D, which is why no explicit
1/D factor appears. The default ``rytov`` kernel keeps only the U_s G_d
product (constant-diffusion assumption) and is strictly negative; ``full``
also carries the dependence of D on mu_a.

The voxel integral uses the element quadrature points that fall in the
voxel, the same points at which the forward model samples a voxel image, so
J is the exact derivative of the discrete forward model: with D held
constant for ``rytov`` and with D following mu_a for ``full``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from ..checks.data import JacobianFiniteCheck
from ..config import ForwardConfig, OpticalConfig
from ..errors import InvalidParameterError, ShapeMismatchError, SolverError
from ..forward.assembly import diffusion_coefficient
from ..forward.model import ForwardModel, Sinogram
from ..geometry.elements import TRIANGLE_POINTS, TRIANGLE_WEIGHTS, shape_lambda_derivatives, shape_values
from ..geometry.mesh import Mesh
from ..geometry.probes import ProbeLayout
from ..geometry.voxels import VoxelGrid
from ..utils.logging import get_logger
from ..utils.telemetry import JACOBIAN_LATENCY, timed

logger = get_logger(__name__)

KERNELS = ("rytov", "full")


@dataclass(frozen=True, eq=False)
class BackgroundFields:
    """Background fluence per source and adjoint field per detector"""

    mesh: Mesh
    layout: ProbeLayout
    mu_a: float
    fluence: np.ndarray
    adjoint: np.ndarray
    sinogram: Sinogram


@dataclass(frozen=True, eq=False)
class JacobianSystem:
    """Sensitivity matrix with the measured right-hand side"""

    J: np.ndarray
    background_sinogram: Sinogram
    grid: VoxelGrid
    b: Optional[np.ndarray] = None
    kernel: str = "rytov"

    @property
    def M(self) -> int:
        return self.J.shape[0]

    @property
    def V(self) -> int:
        return self.J.shape[1]

    def with_rhs(self, y_measured: np.ndarray) -> "JacobianSystem":
        b = build_rhs(y_measured, self.background_sinogram.flat)
        return JacobianSystem(self.J, self.background_sinogram, self.grid, b, self.kernel)


def background_solve(
    mesh: Mesh,
    optics: OpticalConfig,
    layout: ProbeLayout,
    forward: Optional[ForwardConfig] = None,
) -> BackgroundFields:
    """
    Solve the homogeneous medium for all sources and all detector adjoints.

    Both families share one factorization of the background operator, which
    is symmetric, so the adjoint problems use the same matrix.
    """
    model = ForwardModel(mesh, layout, optics, forward)
    system = model.system(optics.mu_a_background)
    operator = model.operator(system)

    adjoint_loads = model.detectors.T.toarray()
    rhs = np.hstack([model.loads, adjoint_loads])
    solution = system.expand(operator.solve(system.restrict(rhs)))
    fluence, adjoint = solution[:, : layout.n_s], solution[:, layout.n_s :]

    sinogram = Sinogram(np.asarray((model.detectors @ fluence).T))
    logger.info(
        "Background solved",
        extra={"sources": layout.n_s, "detectors": layout.n_d, "nodes": mesh.n_nodes},
    )
    return BackgroundFields(mesh, layout, optics.mu_a_background, fluence, adjoint, sinogram)


def voxel_quadrature(mesh: Mesh, grid: VoxelGrid) -> sparse.csr_matrix:
    """
    Sparse (V, E * Q) matrix of quadrature weights grouped by voxel.

    Row v holds the weight times element area of every element quadrature
    point whose active voxel is v, so ``P @ f`` integrates a field sampled
    at the quadrature points over each voxel.
    """
    points = mesh.physical_points(TRIANGLE_POINTS).reshape(-1, 2)
    weights = (TRIANGLE_WEIGHTS * mesh.areas[:, None]).ravel()
    index = grid.voxel_index(points)
    inside = np.flatnonzero(index >= 0)
    P = sparse.csr_matrix((weights[inside], (index[inside], inside)), shape=(grid.V, len(points)))
    empty = int(np.count_nonzero(np.diff(P.indptr) == 0))
    if empty:
        logger.warning("Voxels without quadrature points", extra={"voxels": empty, "mesh_h": mesh.h})
    return P


def _at_quadrature(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """Columns of nodal fields at the quadrature points, shape (E * Q, k)"""
    phi = shape_values(mesh.element_order, TRIANGLE_POINTS)
    return np.einsum("qa,eak->eqk", phi, nodal[mesh.elements]).reshape(-1, nodal.shape[1])


def _gradients_at_quadrature(mesh: Mesh, nodal: np.ndarray) -> np.ndarray:
    """Gradients of nodal fields at the quadrature points, shape (E * Q, k, 2)"""
    dphi = shape_lambda_derivatives(mesh.element_order, TRIANGLE_POINTS)
    grads = np.einsum("qak,ekd->eqad", dphi, mesh.lambda_gradients)
    return np.einsum("eqad,eak->eqkd", grads, nodal[mesh.elements]).reshape(-1, nodal.shape[1], 2)


def assemble_jacobian(
    background: BackgroundFields,
    grid: VoxelGrid,
    optics: OpticalConfig,
    kernel: str = "rytov",
    single_precision: bool = False,
) -> JacobianSystem:
    """
    Assemble the M x V sensitivity matrix by the adjoint method.

    Rows are ordered source-major (row = s * n_d + d); columns follow the
    active voxels of ``grid``. Each entry integrates the kernel over the
    element quadrature points inside the voxel.
    """
    if kernel not in KERNELS:
        raise InvalidParameterError("Unknown Jacobian kernel", kernel=kernel)
    if background.mesh.shape != grid.shape:
        raise ShapeMismatchError("Voxel grid and mesh cover different domains")

    y0 = background.sinogram.values
    if np.any(y0 <= 0):
        raise SolverError("Background reading is not positive", min=float(y0.min()))

    with timed(JACOBIAN_LATENCY):
        mesh = background.mesh
        P = voxel_quadrature(mesh, grid)
        u = _at_quadrature(mesh, background.fluence)
        g = _at_quadrature(mesh, background.adjoint)
        if kernel == "full":
            d0 = float(diffusion_coefficient(background.mu_a, optics))
            du = _gradients_at_quadrature(mesh, background.fluence)
            dg = _gradients_at_quadrature(mesh, background.adjoint)

        n_s, n_d = y0.shape
        J = np.empty((n_s * n_d, grid.V), dtype=np.float32 if single_precision else np.float64)
        for s in range(n_s):
            integrand = g * u[:, s, None]
            if kernel == "full":
                integrand -= 3.0 * d0**2 * np.einsum("pkd,pd->pk", dg, du[:, s])
            J[s * n_d : (s + 1) * n_d] = -(P @ integrand).T / y0[s][:, None]

    system = JacobianSystem(J=J, background_sinogram=background.sinogram, grid=grid, kernel=kernel)
    result = JacobianFiniteCheck().check(system)
    if not result.passed:
        raise SolverError(f"Jacobian failed validation: {result.message}", kernel=kernel)
    logger.info(
        "Jacobian assembled",
        extra={"rows": J.shape[0], "voxels": J.shape[1], "kernel": kernel, "warnings": result.warnings or []},
    )
    return system


def build_rhs(y_measured: np.ndarray, y_background: np.ndarray) -> np.ndarray:
    """
    Log-ratio data b = log(y / y0)

    Raises:
        InvalidParameterError: if either sinogram has non-positive entries
    """
    y_measured = np.asarray(getattr(y_measured, "flat", y_measured), dtype=float).reshape(-1)
    y_background = np.asarray(getattr(y_background, "flat", y_background), dtype=float).reshape(-1)
    if y_measured.shape != y_background.shape:
        raise ShapeMismatchError("Sinogram lengths differ", measured=y_measured.size, background=y_background.size)
    if np.any(y_measured <= 0) or np.any(y_background <= 0):
        raise InvalidParameterError("Sinograms must be strictly positive")
    return np.log(y_measured / y_background)


def rytov_system(
    mesh: Mesh,
    optics: OpticalConfig,
    layout: ProbeLayout,
    grid: VoxelGrid,
    forward: Optional[ForwardConfig] = None,
    kernel: str = "rytov",
    single_precision: bool = False,
) -> JacobianSystem:
    """Background solves followed by Jacobian assembly"""
    background = background_solve(mesh, optics, layout, forward)
    return assemble_jacobian(background, grid, optics, kernel=kernel, single_precision=single_precision)

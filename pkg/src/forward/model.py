from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional

import numpy as np
from scipy import sparse

from ..config import ForwardConfig, OpticalConfig
from ..errors import ShapeMismatchError
from ..geometry.mesh import Mesh
from ..geometry.probes import ProbeLayout
from ..utils.logging import get_logger
from .assembly import DiffusionSystem, Field, assemble_system, gaussian_source_samples, point_load
from .solver import FactorizedOperator

logger = get_logger(__name__)

# Tolerance of the discrete maximum-principle check relative to the field maximum
_NEGATIVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FluenceField:
    """Nodal fluence (W cm^-2) of one source"""

    nodal_values: np.ndarray
    mesh: Mesh
    source_index: int


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Detector readings indexed (source, detector)"""

    values: np.ndarray

    @property
    def n_s(self) -> int:
        return self.values.shape[0]

    @property
    def n_d(self) -> int:
        return self.values.shape[1]

    @property
    def flat(self) -> np.ndarray:
        """Measurement vector of length M, source-major"""
        return self.values.reshape(-1)

    @property
    def M(self) -> int:
        return self.values.size


def source_loads(mesh: Mesh, layout: ProbeLayout, sigma: float = 0.05) -> np.ndarray:
    """Nodal load vectors of the Gaussian volume sources, shape (N, n_s)"""
    loads = np.zeros((mesh.n_nodes, layout.n_s))
    for s, (center, amplitude) in enumerate(zip(layout.sources, layout.amplitudes)):
        if amplitude == 0:
            continue
        points, weights = gaussian_source_samples(center, sigma, mesh, amplitude=amplitude)
        loads[:, s] = point_load(mesh, points, weights)
    return loads


def detector_matrix(mesh: Mesh, layout: ProbeLayout) -> sparse.csr_matrix:
    """Rows evaluate a nodal field at each detector, shape (n_d, N)"""
    return mesh.interpolation_matrix(layout.detectors)


class ForwardModel:
    """
    Forward map from absorption fields to sinograms on a fixed mesh and layout.

    Source loads and the detector operator depend only on the geometry and
    are computed once; each call assembles and factorizes the system for the
    given absorption field.
    """

    def __init__(self, mesh: Mesh, layout: ProbeLayout, optics: OpticalConfig, forward: Optional[ForwardConfig] = None):
        self.mesh = mesh
        self.layout = layout
        self.optics = optics
        self.forward = forward or ForwardConfig()

    @cached_property
    def loads(self) -> np.ndarray:
        return source_loads(self.mesh, self.layout, self.forward.source_sigma)

    @cached_property
    def detectors(self) -> sparse.csr_matrix:
        return detector_matrix(self.mesh, self.layout)

    def system(self, mu_a: Field) -> DiffusionSystem:
        return assemble_system(self.mesh, mu_a, self.optics, constant_diffusion=self.forward.diffusion == "constant")

    def operator(self, system: DiffusionSystem) -> FactorizedOperator:
        return FactorizedOperator(
            system.matrix,
            method=self.forward.linear_solver,
            rtol=self.forward.rtol,
            max_iter=self.forward.cg_max_iter,
        )

    def fluence(self, mu_a: Field) -> np.ndarray:
        """Nodal fluence of every source, shape (N, n_s)"""
        system = self.system(mu_a)
        solution = system.expand(self.operator(system).solve(system.restrict(self.loads)))
        _check_max_principle(solution)
        return solution

    def sinogram(self, mu_a: Field) -> Sinogram:
        return Sinogram(np.asarray((self.detectors @ self.fluence(mu_a)).T))


def _check_max_principle(solution: np.ndarray) -> None:
    scale = np.abs(solution).max(initial=0.0)
    if scale > 0 and solution.min() < -_NEGATIVITY_TOL * scale:
        # quadratic elements do not satisfy a discrete maximum principle
        logger.warning(
            "Fluence has negative nodal values",
            extra={"min": float(solution.min()), "max": float(scale)},
        )


def solve_forward(
    mesh: Mesh,
    mu_a: Field,
    optics: OpticalConfig,
    layout: ProbeLayout,
    forward: Optional[ForwardConfig] = None,
) -> List[FluenceField]:
    """
    Solve the diffusion problem for every source of the layout.

    Args:
        mesh: triangulation of the domain
        mu_a: absorption coefficient, scalar, nodal or analytic
        optics: optical constants
        layout: sources (with amplitudes) and detectors
        forward: discretization and solver options

    Returns:
        List[FluenceField]: one field per source, in layout order
    """
    solution = ForwardModel(mesh, layout, optics, forward).fluence(mu_a)
    return [FluenceField(solution[:, s], mesh, s) for s in range(layout.n_s)]


def measure(fields: List[FluenceField], layout: ProbeLayout) -> Sinogram:
    """Interpolate each source's fluence at the detectors"""
    if not fields:
        raise ShapeMismatchError("No fluence fields to measure")
    mesh = fields[0].mesh
    if any(field.mesh is not mesh for field in fields):
        raise ShapeMismatchError("Fluence fields come from different meshes")
    if len(fields) != layout.n_s:
        raise ShapeMismatchError("One fluence field per source is required", expected=layout.n_s, got=len(fields))
    stacked = np.column_stack([field.nodal_values for field in fields])
    return Sinogram(np.asarray((detector_matrix(mesh, layout) @ stacked).T))

"""Galerkin assembly of the steady-state diffusion approximation.

The bilinear form is

    a(U, V) = (D grad U, grad V) + (mu_a U, V) + (2 c_d / zeta) <U, V>_robin

with D = 1 / (3 (mu_a + (1 - g) mu_s)) (or held at its background value
when requested), the Robin term on every edge tagged
``lateral_top`` and U = 0 on the bottom plate.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import sparse

from ..config import OpticalConfig
from ..errors import InvalidParameterError, ShapeMismatchError
from ..geometry.elements import (
    EDGE_POINTS,
    EDGE_WEIGHTS,
    TRIANGLE_POINTS,
    TRIANGLE_WEIGHTS,
    shape_lambda_derivatives,
    shape_values,
)
from ..geometry.mesh import BOTTOM, LATERAL_TOP, Mesh

# Scalar, nodal vector or callable of (P, 2) points
Field = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


def diffusion_coefficient(mu_a, optics: OpticalConfig):
    """D = 1 / (3 (mu_a + (1 - g) mu_s))"""
    return 1.0 / (3.0 * (np.asarray(mu_a) + optics.reduced_scattering))


def field_at_quadrature(mesh: Mesh, field: Field) -> np.ndarray:
    """Evaluate a scalar, nodal or analytic field at the element quadrature points, shape (E, Q)"""
    n_q = len(TRIANGLE_WEIGHTS)
    if callable(field):
        points = mesh.physical_points(TRIANGLE_POINTS)
        return np.asarray(field(points.reshape(-1, 2)), dtype=float).reshape(mesh.n_elements, n_q)
    if np.isscalar(field) or np.ndim(field) == 0:
        return np.full((mesh.n_elements, n_q), float(field))
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_nodes,):
        raise ShapeMismatchError("Nodal field does not match the mesh", expected=mesh.n_nodes, got=field.shape)
    phi = shape_values(mesh.element_order, TRIANGLE_POINTS)
    return field[mesh.elements] @ phi.T


def _scatter(mesh: Mesh, local: np.ndarray) -> sparse.csr_matrix:
    nb = local.shape[-1]
    rows = np.repeat(mesh.elements, nb, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nb)).ravel()
    return sparse.csr_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))


def stiffness_matrix(mesh: Mesh, coefficient: np.ndarray) -> sparse.csr_matrix:
    """(coefficient grad U, grad V) for a coefficient given at quadrature points"""
    order = mesh.element_order
    dphi = shape_lambda_derivatives(order, TRIANGLE_POINTS)
    grads = np.einsum("qak,ekd->eqad", dphi, mesh.lambda_gradients)
    weights = coefficient * TRIANGLE_WEIGHTS * mesh.areas[:, None]
    local = np.einsum("eq,eqad,eqbd->eab", weights, grads, grads)
    return _scatter(mesh, local)


def mass_matrix(mesh: Mesh, coefficient: np.ndarray) -> sparse.csr_matrix:
    """(coefficient U, V) for a coefficient given at quadrature points"""
    phi = shape_values(mesh.element_order, TRIANGLE_POINTS)
    weights = coefficient * TRIANGLE_WEIGHTS * mesh.areas[:, None]
    local = np.einsum("eq,qa,qb->eab", weights, phi, phi)
    return _scatter(mesh, local)


def _edge_basis(mesh: Mesh) -> np.ndarray:
    """Edge shape functions at the edge Gauss points, shape (Q, 2|3) for [a, b, (mid)]"""
    t = EDGE_POINTS
    if mesh.element_order == 1:
        return np.column_stack([1 - t, t])
    return np.column_stack([(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)])


def robin_matrix(mesh: Mesh, coefficient: float, tag: str = LATERAL_TOP) -> sparse.csr_matrix:
    """coefficient * <U, V> over boundary edges with ``tag``"""
    edges = mesh.boundary_edges_tagged(tag)
    lengths = np.linalg.norm(mesh.nodes[edges[:, 1]] - mesh.nodes[edges[:, 0]], axis=1)
    psi = _edge_basis(mesh)
    local = coefficient * np.einsum("e,q,qa,qb->eab", lengths, EDGE_WEIGHTS, psi, psi)
    nb = psi.shape[1]
    rows = np.repeat(edges, nb, axis=1).ravel()
    cols = np.tile(edges, (1, nb)).ravel()
    return sparse.csr_matrix((local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes))


def volume_load(mesh: Mesh, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """(f, V) for an analytic source density"""
    points = mesh.physical_points(TRIANGLE_POINTS)
    values = np.asarray(f(points.reshape(-1, 2)), dtype=float).reshape(mesh.n_elements, -1)
    phi = shape_values(mesh.element_order, TRIANGLE_POINTS)
    local = np.einsum("eq,q,qa->ea", values * mesh.areas[:, None], TRIANGLE_WEIGHTS, phi)
    return np.bincount(mesh.elements.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def boundary_load(mesh: Mesh, g: Callable[[np.ndarray], np.ndarray], tag: str = LATERAL_TOP) -> np.ndarray:
    """<g, V> over boundary edges with ``tag``"""
    edges = mesh.boundary_edges_tagged(tag)
    a, b = mesh.nodes[edges[:, 0]], mesh.nodes[edges[:, 1]]
    lengths = np.linalg.norm(b - a, axis=1)
    points = a[:, None, :] + EDGE_POINTS[None, :, None] * (b - a)[:, None, :]
    values = np.asarray(g(points.reshape(-1, 2)), dtype=float).reshape(len(edges), -1)
    local = np.einsum("eq,e,q,qa->ea", values, lengths, EDGE_WEIGHTS, _edge_basis(mesh))
    return np.bincount(edges.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def gaussian_source_samples(
    center: np.ndarray, sigma: float, mesh: Mesh, amplitude: float = 1.0, n_side: int = 7
):
    """
    Discretize an isotropic Gaussian volume source into weighted points.

    The density is sampled on an ``n_side`` x ``n_side`` lattice spanning
    +/- 3 sigma; samples outside the domain are dropped and the remaining
    weights are renormalized to ``amplitude``.
    """
    offsets = np.linspace(-3.0 * sigma, 3.0 * sigma, n_side)
    dx, dy = np.meshgrid(offsets, offsets)
    points = np.column_stack([center[0] + dx.ravel(), center[1] + dy.ravel()])
    weights = np.exp(-(dx.ravel() ** 2 + dy.ravel() ** 2) / (2.0 * sigma**2))
    inside = mesh.shape.contains(points, tol=0.0)
    points, weights = points[inside], weights[inside]
    if len(points) == 0:
        raise InvalidParameterError("Source lies outside the domain", x=float(center[0]), y=float(center[1]))
    return points, amplitude * weights / weights.sum()


def point_load(mesh: Mesh, points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Load vector of weighted point sources sum_k w_k V(x_k)"""
    return mesh.interpolation_matrix(points).T @ weights


@dataclass(frozen=True, eq=False)
class DiffusionSystem:
    """
    Assembled diffusion operator restricted to the free (non-Dirichlet) nodes.

    ``matrix`` acts on the free unknowns only; ``expand`` and ``restrict``
    move between free vectors and full nodal vectors.
    """

    mesh: Mesh
    matrix: sparse.csc_matrix
    free: np.ndarray

    def restrict(self, vector: np.ndarray) -> np.ndarray:
        return vector[self.free]

    def expand(self, values: np.ndarray) -> np.ndarray:
        full = np.zeros((self.mesh.n_nodes,) + values.shape[1:], dtype=values.dtype)
        full[self.free] = values
        return full


def assemble_system(
    mesh: Mesh,
    mu_a: Field,
    optics: OpticalConfig,
    dirichlet_bottom: bool = True,
    constant_diffusion: bool = False,
) -> DiffusionSystem:
    """
    Assemble the symmetric positive-definite diffusion system.

    Args:
        mesh: triangulation of the domain
        mu_a: absorption coefficient (cm^-1), scalar, nodal or analytic
        optics: scattering, anisotropy and boundary constants
        dirichlet_bottom: enforce U = 0 on the bottom plate
        constant_diffusion: hold D at the background value instead of following mu_a

    Returns:
        DiffusionSystem: operator on the free nodes

    Raises:
        InvalidParameterError: if mu_a is not strictly positive
    """
    mu_q = field_at_quadrature(mesh, mu_a)
    if not np.all(np.isfinite(mu_q)) or np.any(mu_q <= 0):
        raise InvalidParameterError("Absorption coefficient must be positive and finite", min=float(np.nanmin(mu_q)))

    if constant_diffusion:
        stiffness = stiffness_matrix(mesh, np.full_like(mu_q, optics.background_diffusion))
    else:
        stiffness = stiffness_matrix(mesh, diffusion_coefficient(mu_q, optics))
    mass = mass_matrix(mesh, mu_q)
    robin = robin_matrix(mesh, 2.0 * optics.c_d / optics.zeta)
    full = (stiffness + mass + robin).tocsr()
    # exact symmetry regardless of summation order in the scatter
    full = (full + full.T) * 0.5

    if dirichlet_bottom:
        fixed = np.zeros(mesh.n_nodes, dtype=bool)
        fixed[mesh.boundary_nodes(BOTTOM)] = True
        free = np.flatnonzero(~fixed)
    else:
        free = np.arange(mesh.n_nodes)
    matrix = full[free][:, free].tocsc()
    return DiffusionSystem(mesh=mesh, matrix=matrix, free=free)


def manufactured_problem(optics: OpticalConfig, mu_a: float, width: float = 10.0):
    """
    Source and Robin data for the exact solution U = sin(pi x / width) y on a rectangle.

    Returns:
        (exact, f, g) callables of (P, 2) points
    """
    d = float(diffusion_coefficient(mu_a, optics))
    k = np.pi / width
    robin = 2.0 * optics.c_d / optics.zeta

    def exact(points):
        return np.sin(k * points[:, 0]) * points[:, 1]

    def f(points):
        return (d * k**2 + mu_a) * exact(points)

    def g(points):
        x, y = points[:, 0], points[:, 1]
        dudx = k * np.cos(k * x) * y
        dudy = np.sin(k * x)
        on_left = np.isclose(x, 0.0)
        on_right = np.isclose(x, width)
        normal_derivative = np.where(on_left, -dudx, np.where(on_right, dudx, dudy))
        return d * normal_derivative + robin * exact(points)

    return exact, f, g


def l2_error(mesh: Mesh, nodal: np.ndarray, exact: Callable[[np.ndarray], np.ndarray]) -> float:
    """L2 norm of (u_h - exact) by element quadrature"""
    uh = field_at_quadrature(mesh, nodal)
    points = mesh.physical_points(TRIANGLE_POINTS).reshape(-1, 2)
    diff = uh - np.asarray(exact(points)).reshape(uh.shape)
    return float(np.sqrt(np.sum(diff**2 * TRIANGLE_WEIGHTS * mesh.areas[:, None])))

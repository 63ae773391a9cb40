from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from ..errors import GeometryError
from ..utils.logging import get_logger
from .elements import (
    LOCAL_EDGES,
    barycentric_gradients,
    n_local_nodes,
    shape_values,
    signed_areas,
)
from .shapes import DomainShape

logger = get_logger(__name__)

BOTTOM = "bottom"
LATERAL_TOP = "lateral_top"

# Points outside every element by more than this (in barycentric units) are rejected
_LOCATE_SLACK = 0.25


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Triangulation of a DomainShape.

    ``elements`` holds vertex indices (counter-clockwise) followed, for
    order 2, by the midpoint nodes of edges (0,1), (1,2), (2,0).
    ``boundary_edges`` rows are ``[a, b]`` or ``[a, b, mid]`` oriented with the
    domain on the left.
    """

    shape: DomainShape
    nodes: np.ndarray
    elements: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    element_order: int
    h: float

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def vertices(self) -> np.ndarray:
        """(E, 3, 2) vertex coordinates"""
        return self.nodes[self.elements[:, :3]]

    @cached_property
    def areas(self) -> np.ndarray:
        return signed_areas(self.vertices)

    @cached_property
    def lambda_gradients(self) -> np.ndarray:
        return barycentric_gradients(self.vertices)

    @cached_property
    def max_diameter(self) -> float:
        v = self.vertices
        edges = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 1], v[:, 0] - v[:, 2]], axis=1)
        return float(np.linalg.norm(edges, axis=-1).max())

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices.mean(axis=1)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.centroids)

    def boundary_edges_tagged(self, tag: str) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == tag]

    def boundary_nodes(self, tag: str) -> np.ndarray:
        """Sorted indices of every node lying on edges with ``tag``"""
        return np.unique(self.boundary_edges_tagged(tag).ravel())

    def physical_points(self, lam: np.ndarray) -> np.ndarray:
        """Map barycentric points (Q, 3) into every element, shape (E, Q, 2)"""
        return np.einsum("qk,ekd->eqd", lam, self.vertices)

    def locate(self, points: np.ndarray, tol: float = 1e-10) -> Tuple[np.ndarray, np.ndarray]:
        """
        Find the containing element of each point.

        Args:
            points: (P, 2) coordinates
            tol: barycentric tolerance for points on element edges

        Returns:
            (element indices (P,), barycentric coordinates (P, 3))

        Raises:
            GeometryError: if a point lies outside the mesh
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        k = min(12, self.n_elements)
        _, candidates = self._centroid_tree.query(points, k=k)
        candidates = np.asarray(candidates).reshape(len(points), k)

        found = np.empty(len(points), dtype=np.int64)
        bary = np.empty((len(points), 3))
        for p, point in enumerate(points):
            lam = self._barycentric(candidates[p], point)
            score = lam.min(axis=1)
            best = int(np.argmax(score))
            if score[best] < -tol:
                lam_all = self._barycentric(np.arange(self.n_elements), point)
                scores_all = lam_all.min(axis=1)
                best_all = int(np.argmax(scores_all))
                if scores_all[best_all] < -_LOCATE_SLACK:
                    raise GeometryError("Point lies outside the mesh", x=float(point[0]), y=float(point[1]))
                found[p] = best_all
                bary[p] = self._clamp(lam_all[best_all])
                continue
            found[p] = candidates[p, best]
            bary[p] = self._clamp(lam[best])
        return found, bary

    def _barycentric(self, elements: np.ndarray, point: np.ndarray) -> np.ndarray:
        v0 = self.vertices[elements, 0]
        grads = self.lambda_gradients[elements]
        lam = np.einsum("ekd,ed->ek", grads, point - v0)
        lam[:, 0] += 1.0
        return lam

    @staticmethod
    def _clamp(lam: np.ndarray) -> np.ndarray:
        lam = np.clip(lam, 0.0, None)
        return lam / lam.sum()

    def interpolation_matrix(self, points: np.ndarray) -> sparse.csr_matrix:
        """Sparse (P, N) matrix evaluating a nodal field at ``points``"""
        elements, lam = self.locate(points)
        values = shape_values(self.element_order, lam)
        rows = np.repeat(np.arange(len(elements)), values.shape[1])
        cols = self.elements[elements].ravel()
        return sparse.csr_matrix((values.ravel(), (rows, cols)), shape=(len(elements), self.n_nodes))

    def export_text(self, path: Path) -> None:
        """Write a plain-text node/element/boundary listing for debugging"""
        lines = [f"mesh {self.shape.kind.value} order {self.element_order} h {self.h!r}"]
        lines.extend(f"node {i} {x!r} {y!r}" for i, (x, y) in enumerate(self.nodes))
        lines.extend("element {} {}".format(e, " ".join(map(str, row))) for e, row in enumerate(self.elements))
        lines.extend(
            "boundary {} {}".format(tag, " ".join(map(str, row)))
            for row, tag in zip(self.boundary_edges, self.boundary_tags)
        )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_mesh(shape: DomainShape, h: float, order: int = 2) -> Mesh:
    """
    Build a structured triangulation of ``shape``.

    The rectangle is split into square-ish cells of leg at most ``h`` with
    alternating diagonals. The semi-disk uses concentric rings of spacing at
    most ``h`` with arc segments of length at most ``h``.

    Args:
        shape: domain to mesh
        h: target edge length (cm)
        order: 1 for linear, 2 for quadratic elements

    Returns:
        Mesh: validated triangulation
    """
    if not h > 0:
        raise GeometryError("Mesh size must be positive", h=h)
    if h > shape.min_dimension:
        raise GeometryError("Mesh size too large for the domain", h=h, min_dimension=shape.min_dimension)
    n_local_nodes(order)

    if shape.is_rectangle:
        nodes, triangles, edges, tags = _rectangle_mesh(shape, h)
    else:
        nodes, triangles, edges, tags = _semi_disk_mesh(shape, h)

    triangles = _orient(nodes, triangles)
    if order == 2:
        nodes, triangles, edges = _add_midpoints(nodes, triangles, edges)

    mesh = Mesh(
        shape=shape,
        nodes=nodes,
        elements=triangles,
        boundary_edges=edges,
        boundary_tags=np.asarray(tags),
        element_order=order,
        h=float(h),
    )

    from ..checks.mesh import mesh_check_chain

    result = mesh_check_chain().check(mesh)
    if not result.passed:
        raise GeometryError(f"Mesh failed validation: {result.message}")
    logger.debug(
        "Mesh built",
        extra={"nodes": mesh.n_nodes, "elements": mesh.n_elements, "order": order, "h": h},
    )
    return mesh


def _rectangle_mesh(shape: DomainShape, h: float):
    nx = int(np.ceil(shape.width / h - 1e-9))
    ny = int(np.ceil(shape.height / h - 1e-9))
    xs = np.linspace(0.0, shape.width, nx + 1)
    ys = np.linspace(0.0, shape.height, ny + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    def node(i, j):
        return j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            n00, n10, n01, n11 = node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)
            if (i + j) % 2 == 0:
                triangles += [(n00, n10, n11), (n00, n11, n01)]
            else:
                triangles += [(n00, n10, n01), (n10, n11, n01)]

    edges: List[Tuple[int, int]] = []
    tags: List[str] = []
    for i in range(nx):
        edges.append((node(i, 0), node(i + 1, 0)))
        tags.append(BOTTOM)
    for j in range(ny):
        edges.append((node(nx, j), node(nx, j + 1)))
        tags.append(LATERAL_TOP)
    for i in range(nx, 0, -1):
        edges.append((node(i, ny), node(i - 1, ny)))
        tags.append(LATERAL_TOP)
    for j in range(ny, 0, -1):
        edges.append((node(0, j), node(0, j - 1)))
        tags.append(LATERAL_TOP)
    return nodes, np.asarray(triangles, dtype=np.int64), np.asarray(edges, dtype=np.int64), tags


def _semi_disk_mesh(shape: DomainShape, h: float):
    r = shape.radius
    n_rings = int(np.ceil(r / h - 1e-9))
    radii = r * np.arange(1, n_rings + 1) / n_rings

    nodes = [(0.0, 0.0)]
    rings: List[np.ndarray] = []
    segments = 3
    for rho in radii:
        segments = max(segments, int(np.ceil(np.pi * rho / h - 1e-9)))
        theta = np.pi * np.arange(segments + 1) / segments
        start = len(nodes)
        nodes.extend(zip(rho * np.cos(theta), rho * np.sin(theta)))
        rings.append(np.arange(start, start + segments + 1))
    nodes = np.asarray(nodes)
    # snap the outer ring and the diameter exactly onto the boundary
    outer = rings[-1]
    nodes[outer] *= r / np.linalg.norm(nodes[outer], axis=1)[:, None]
    nodes[[ring[0] for ring in rings] + [ring[-1] for ring in rings], 1] = 0.0

    triangles = [(0, rings[0][j], rings[0][j + 1]) for j in range(len(rings[0]) - 1)]
    for inner, outer_ring in zip(rings[:-1], rings[1:]):
        triangles.extend(_stitch_rings(inner, outer_ring))

    edges: List[Tuple[int, int]] = []
    tags: List[str] = []
    # diameter from (-r, 0) to (r, 0), then the arc back
    left = [ring[-1] for ring in reversed(rings)] + [0]
    right = [ring[0] for ring in rings]
    diameter = left + right
    for a, b in zip(diameter[:-1], diameter[1:]):
        edges.append((a, b))
        tags.append(BOTTOM)
    for a, b in zip(outer[:-1], outer[1:]):
        edges.append((int(a), int(b)))
        tags.append(LATERAL_TOP)
    return nodes, np.asarray(triangles, dtype=np.int64), np.asarray(edges, dtype=np.int64), tags


def _stitch_rings(inner: np.ndarray, outer: np.ndarray) -> List[Tuple[int, int, int]]:
    """Triangulate the band between two rings by merging their angles"""
    n_in, n_out = len(inner) - 1, len(outer) - 1
    i = j = 0
    triangles = []
    while i < n_in or j < n_out:
        advance_outer = i == n_in or (j < n_out and (j + 1) / n_out <= (i + 1) / n_in)
        if advance_outer:
            triangles.append((inner[i], outer[j], outer[j + 1]))
            j += 1
        else:
            triangles.append((inner[i], outer[j], inner[i + 1]))
            i += 1
    return triangles


def _orient(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    areas = signed_areas(nodes[triangles])
    flipped = triangles.copy()
    flipped[areas < 0] = flipped[areas < 0][:, [0, 2, 1]]
    return flipped


def _add_midpoints(nodes: np.ndarray, triangles: np.ndarray, edges: np.ndarray):
    local = np.concatenate([np.sort(triangles[:, list(pair)], axis=1) for pair in LOCAL_EDGES])
    unique, inverse = np.unique(local, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    midpoint_ids = len(nodes) + inverse.reshape(len(LOCAL_EDGES), -1).T
    midpoints = nodes[unique].mean(axis=1)

    lookup: Dict[Tuple[int, int], int] = {
        (int(a), int(b)): len(nodes) + k for k, (a, b) in enumerate(unique)
    }
    boundary_mid = np.array([lookup[tuple(sorted((int(a), int(b))))] for a, b in edges], dtype=np.int64)
    return (
        np.vstack([nodes, midpoints]),
        np.hstack([triangles, midpoint_ids]),
        np.column_stack([edges, boundary_mid]),
    )

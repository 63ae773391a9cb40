"""Reference-triangle quadrature and Lagrange shape functions (orders 1 and 2).

Shape functions are written in barycentric coordinates. Quadratic elements
order their six nodes as the three vertices followed by the midpoints of
edges (0,1), (1,2) and (2,0).
"""

import numpy as np

from ..errors import GeometryError

# Symmetric degree-4 rule, barycentric points and weights relative to the area
_A, _WA = 0.445948490915965, 0.223381589678011
_B, _WB = 0.091576213509771, 0.109951743655322
TRIANGLE_POINTS = np.array(
    [
        [_A, _A, 1 - 2 * _A],
        [_A, 1 - 2 * _A, _A],
        [1 - 2 * _A, _A, _A],
        [_B, _B, 1 - 2 * _B],
        [_B, 1 - 2 * _B, _B],
        [1 - 2 * _B, _B, _B],
    ]
)
TRIANGLE_WEIGHTS = np.array([_WA, _WA, _WA, _WB, _WB, _WB])

# 3-point Gauss-Legendre on [0, 1], weights relative to the edge length
EDGE_POINTS = np.array([0.5 - 0.5 * np.sqrt(0.6), 0.5, 0.5 + 0.5 * np.sqrt(0.6)])
EDGE_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])

LOCAL_EDGES = ((0, 1), (1, 2), (2, 0))


def n_local_nodes(order: int) -> int:
    if order == 1:
        return 3
    if order == 2:
        return 6
    raise GeometryError("Element order must be 1 or 2", order=order)


def shape_values(order: int, lam: np.ndarray) -> np.ndarray:
    """Shape function values at barycentric points, shape (P, n_local)"""
    lam = np.atleast_2d(lam)
    if order == 1:
        return lam.copy()
    n_local_nodes(order)
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    return np.stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ],
        axis=1,
    )


def shape_lambda_derivatives(order: int, lam: np.ndarray) -> np.ndarray:
    """Derivatives d(phi_a)/d(lambda_k), shape (P, n_local, 3)"""
    lam = np.atleast_2d(lam)
    n_points = lam.shape[0]
    if order == 1:
        return np.broadcast_to(np.eye(3), (n_points, 3, 3)).copy()
    n_local_nodes(order)
    derivs = np.zeros((n_points, 6, 3))
    for i in range(3):
        derivs[:, i, i] = 4 * lam[:, i] - 1
    for a, (i, j) in enumerate(LOCAL_EDGES, start=3):
        derivs[:, a, i] = 4 * lam[:, j]
        derivs[:, a, j] = 4 * lam[:, i]
    return derivs


def barycentric_gradients(vertices: np.ndarray) -> np.ndarray:
    """
    Gradients of the barycentric coordinates of triangles.

    Args:
        vertices: (E, 3, 2) vertex coordinates

    Returns:
        (E, 3, 2) array, constant over each triangle
    """
    x, y = vertices[..., 0], vertices[..., 1]
    area2 = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grads = np.empty(vertices.shape)
    grads[:, 0] = np.stack([y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]], axis=-1)
    grads[:, 1] = np.stack([y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]], axis=-1)
    grads[:, 2] = np.stack([y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]], axis=-1)
    return grads / area2[:, None, None]


def signed_areas(vertices: np.ndarray) -> np.ndarray:
    x, y = vertices[..., 0], vertices[..., 1]
    return 0.5 * ((x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0]))

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from ..errors import GeometryError, ShapeMismatchError
from .shapes import DomainShape

# Default reconstruction voxel sizes (cm)
RECTANGLE_VOXEL = 0.125
SEMI_DISK_VOXEL = 0.25


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """
    Pixel grid covering the bounding box of a domain.

    Images are (ny, nx) arrays with row 0 at the top of the domain. Active
    voxels (mask true) are enumerated row-major and form the V-vector layout.
    """

    shape: DomainShape
    nx: int
    ny: int
    voxel_size: float
    mask: np.ndarray

    @property
    def V(self) -> int:
        return int(self.mask.sum())

    @property
    def voxel_area(self) -> float:
        return self.voxel_size**2

    @property
    def image_shape(self):
        return self.ny, self.nx

    @cached_property
    def centers(self) -> np.ndarray:
        """(ny, nx, 2) voxel center coordinates"""
        x_min, _, _, y_max = self.shape.bounding_box
        xs = x_min + (np.arange(self.nx) + 0.5) * self.voxel_size
        ys = y_max - (np.arange(self.ny) + 0.5) * self.voxel_size
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx, gy], axis=-1)

    @cached_property
    def active_centers(self) -> np.ndarray:
        return self.centers[self.mask]

    def to_image(self, values: np.ndarray, fill: float = 0.0) -> np.ndarray:
        """Scatter a V-vector (or leading-batch V-vectors) into images"""
        values = np.asarray(values)
        if values.shape[-1] != self.V:
            raise ShapeMismatchError("Voxel vector length mismatch", expected=self.V, got=values.shape[-1])
        image = np.full(values.shape[:-1] + self.image_shape, fill, dtype=values.dtype)
        image[..., self.mask] = values
        return image

    def from_image(self, image: np.ndarray) -> np.ndarray:
        image = np.asarray(image)
        if image.shape[-2:] != self.image_shape:
            raise ShapeMismatchError("Image shape mismatch", expected=self.image_shape, got=image.shape[-2:])
        return image[..., self.mask]

    def voxel_index(self, points: np.ndarray) -> np.ndarray:
        """Active-voxel index of each point, -1 outside every active voxel"""
        points = np.atleast_2d(points)
        x_min, _, _, y_max = self.shape.bounding_box
        col = np.floor((points[:, 0] - x_min) / self.voxel_size).astype(np.int64)
        row = np.floor((y_max - points[:, 1]) / self.voxel_size).astype(np.int64)
        col = np.clip(col, 0, self.nx - 1)
        row = np.clip(row, 0, self.ny - 1)
        lookup = np.full(self.image_shape, -1, dtype=np.int64)
        lookup[self.mask] = np.arange(self.V)
        return lookup[row, col]

    def piecewise_field(self, values: np.ndarray, background: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
        """Field that is ``values[v]`` inside active voxel v and ``background`` elsewhere"""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.V,):
            raise ShapeMismatchError("Voxel vector length mismatch", expected=self.V, got=values.shape)

        def field(points: np.ndarray) -> np.ndarray:
            index = self.voxel_index(points)
            return np.where(index >= 0, values[np.maximum(index, 0)], background)

        return field


def build_voxel_grid(shape: DomainShape, nx: Optional[int] = None, ny: Optional[int] = None) -> VoxelGrid:
    """
    Build the reconstruction grid of a domain.

    Defaults are 80 x 40 voxels of 0.125 cm for the rectangle and 40 x 20
    voxels of 0.25 cm for the semi-disk. Voxels must be square, so a custom
    ``nx`` fixes the voxel size and ``ny`` must agree with it.
    """
    x_min, x_max, y_min, y_max = shape.bounding_box
    width, height = x_max - x_min, y_max - y_min
    default_size = RECTANGLE_VOXEL if shape.is_rectangle else SEMI_DISK_VOXEL

    if nx is None and ny is None:
        voxel_size = default_size
    elif nx is not None:
        voxel_size = width / nx
    else:
        voxel_size = height / ny

    nx_fit = int(round(width / voxel_size))
    ny_fit = int(round(height / voxel_size))
    if (nx is not None and nx != nx_fit) or (ny is not None and ny != ny_fit):
        raise GeometryError("Voxel grid must have square voxels", nx=nx, ny=ny, width=width, height=height)
    if nx_fit < 1 or ny_fit < 1 or not np.isclose(nx_fit * voxel_size, width) or not np.isclose(ny_fit * voxel_size, height):
        raise GeometryError("Voxel size does not tile the domain", voxel_size=voxel_size)

    grid = VoxelGrid(shape=shape, nx=nx_fit, ny=ny_fit, voxel_size=voxel_size, mask=np.ones((ny_fit, nx_fit), dtype=bool))
    if not shape.is_rectangle:
        mask = shape.contains(grid.centers.reshape(-1, 2), tol=0.0).reshape(ny_fit, nx_fit)
        grid = VoxelGrid(shape=shape, nx=nx_fit, ny=ny_fit, voxel_size=voxel_size, mask=mask)
    return grid


def rasterize(
    field: Union[Callable[[np.ndarray], np.ndarray], np.ndarray, float],
    grid: VoxelGrid,
    mesh=None,
    background: float = 0.0,
) -> np.ndarray:
    """
    Sample a field at active voxel centers.

    Args:
        field: a callable of (P, 2) points, a nodal vector on ``mesh`` or a constant
        grid: target voxel grid
        mesh: mesh carrying a nodal ``field``
        background: value written to masked voxels

    Returns:
        (ny, nx) image
    """
    centers = grid.active_centers
    if callable(field):
        values = np.asarray(field(centers), dtype=float)
    elif np.isscalar(field):
        values = np.full(grid.V, float(field))
    else:
        field = np.asarray(field, dtype=float)
        if mesh is None or field.shape != (mesh.n_nodes,):
            raise ShapeMismatchError(
                "Nodal field does not match the mesh",
                field_shape=field.shape,
                nodes=None if mesh is None else mesh.n_nodes,
            )
        if mesh.shape != grid.shape:
            raise ShapeMismatchError("Mesh and voxel grid cover different domains")
        values = mesh.interpolation_matrix(centers) @ field
    return grid.to_image(values, fill=background)

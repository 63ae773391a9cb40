from .shapes import DomainKind, DomainShape
from .mesh import BOTTOM, LATERAL_TOP, Mesh, build_mesh
from .probes import ProbeLayout, build_probe_layout
from .voxels import VoxelGrid, build_voxel_grid, rasterize

__all__ = [
    "DomainKind",
    "DomainShape",
    "BOTTOM",
    "LATERAL_TOP",
    "Mesh",
    "build_mesh",
    "ProbeLayout",
    "build_probe_layout",
    "VoxelGrid",
    "build_voxel_grid",
    "rasterize",
]

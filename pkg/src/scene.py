from dataclasses import dataclass
from typing import Optional

from .config import RunConfig
from .forward.model import ForwardModel
from .geometry.mesh import Mesh, build_mesh
from .geometry.probes import ProbeLayout, build_probe_layout
from .geometry.shapes import DomainShape
from .geometry.voxels import VoxelGrid, build_voxel_grid


@dataclass(frozen=True, eq=False)
class Scene:
    """Geometry, discretization and forward map shared by every stage of a run"""

    config: RunConfig
    shape: DomainShape
    mesh: Mesh
    layout: ProbeLayout
    grid: VoxelGrid
    model: ForwardModel

    @classmethod
    def from_config(cls, config: RunConfig, mesh_h: Optional[float] = None) -> "Scene":
        geometry = config.geometry
        shape = DomainShape.from_config(geometry)
        mesh = build_mesh(shape, mesh_h or config.forward.mesh_h, config.forward.element_order)
        layout = build_probe_layout(shape, geometry.n_sources, geometry.n_detectors, geometry.source_depth)
        grid = build_voxel_grid(shape, geometry.grid_nx, geometry.grid_ny)
        model = ForwardModel(mesh, layout, config.optics, config.forward)
        return cls(config, shape, mesh, layout, grid, model)

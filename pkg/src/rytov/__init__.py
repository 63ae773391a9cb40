from .jacobian import (
    KERNELS,
    BackgroundFields,
    JacobianSystem,
    assemble_jacobian,
    background_solve,
    build_rhs,
    rytov_system,
    voxel_quadrature,
)

__all__ = [
    "KERNELS",
    "BackgroundFields",
    "JacobianSystem",
    "assemble_jacobian",
    "background_solve",
    "build_rhs",
    "rytov_system",
    "voxel_quadrature",
]

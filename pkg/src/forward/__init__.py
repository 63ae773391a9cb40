from .assembly import DiffusionSystem, assemble_system, diffusion_coefficient, l2_error, manufactured_problem
from .model import FluenceField, ForwardModel, Sinogram, detector_matrix, measure, solve_forward, source_loads
from .solver import FactorizedOperator

__all__ = [
    "DiffusionSystem",
    "assemble_system",
    "diffusion_coefficient",
    "l2_error",
    "manufactured_problem",
    "FluenceField",
    "ForwardModel",
    "Sinogram",
    "detector_matrix",
    "measure",
    "solve_forward",
    "source_loads",
    "FactorizedOperator",
]

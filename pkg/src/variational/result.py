from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..config import OpticalConfig
from ..forward.assembly import diffusion_coefficient
from ..schemas.results import SolverInfo


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Voxel increment over the background with solver metadata"""

    delta_mu: np.ndarray
    background: float
    info: SolverInfo
    history: List[np.ndarray] = field(default_factory=list)

    @property
    def mu(self) -> np.ndarray:
        return self.background + self.delta_mu

    def mu_over_d(self, optics: OpticalConfig) -> np.ndarray:
        return mu_over_d(self.mu, optics)


def mu_over_d(mu_a: np.ndarray, optics: OpticalConfig) -> np.ndarray:
    """Presentation scaling mu_a / D(mu_a)"""
    mu_a = np.asarray(mu_a, dtype=float)
    return mu_a / diffusion_coefficient(mu_a, optics)

from .bregman import bregman_solve
from .elastic_net import alpha_grid, alpha_max, cross_validate_alpha, elastic_net_solve, kkt_residual
from .proximal import fista, soft_threshold
from .result import Reconstruction, mu_over_d
from .spectral import filter_factors, svd_filter_solve

__all__ = [
    "bregman_solve",
    "alpha_grid",
    "alpha_max",
    "cross_validate_alpha",
    "elastic_net_solve",
    "kkt_residual",
    "fista",
    "soft_threshold",
    "Reconstruction",
    "mu_over_d",
    "filter_factors",
    "svd_filter_solve",
]

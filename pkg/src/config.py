import math
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError


class _Section(BaseModel):
    """Strict configuration section: unknown keys are rejected"""

    model_config = ConfigDict(extra="forbid", frozen=True)


class GeometryConfig(_Section):
    """Domain, probe layout and reconstruction grid"""

    domain: Literal["rectangle", "semi_disk"] = "rectangle"
    width: float = Field(default=10.0, gt=0)
    height: float = Field(default=5.0, gt=0)
    radius: float = Field(default=5.0, gt=0)
    n_sources: int = Field(default=19, ge=1)
    n_detectors: int = Field(default=200, ge=1)
    source_depth: float = Field(default=0.1, gt=0)
    grid_nx: Optional[int] = Field(default=None, ge=1)
    grid_ny: Optional[int] = Field(default=None, ge=1)


class OpticalConfig(_Section):
    """Optical coefficients of the diffusion approximation (cm^-1 unless noted)"""

    mu_a_background: float = Field(default=0.01, gt=0)
    mu_a_max: float = Field(default=1.0, gt=0)
    mu_s: float = Field(default=1.0, gt=0)
    g: float = Field(default=0.8, ge=-1.0, le=1.0)
    zeta: float = Field(default=1.0, gt=0)
    c_d: float = Field(default=1.0 / math.pi, gt=0)

    @model_validator(mode="after")
    def _check_bounds(self) -> "OpticalConfig":
        if self.mu_a_background > self.mu_a_max:
            raise ValueError("mu_a_background must not exceed mu_a_max")
        return self

    @property
    def reduced_scattering(self) -> float:
        return (1.0 - self.g) * self.mu_s

    @property
    def background_diffusion(self) -> float:
        return 1.0 / (3.0 * (self.mu_a_background + self.reduced_scattering))


class ForwardConfig(_Section):
    """Finite element discretization and linear solver"""

    mesh_h: float = Field(default=0.125, gt=0)
    element_order: Literal[1, 2] = 2
    source_sigma: float = Field(default=0.05, gt=0)
    # "constant" holds D at its background value, the medium the Rytov kernel linearizes
    diffusion: Literal["coupled", "constant"] = "coupled"
    linear_solver: Literal["direct", "cg"] = "direct"
    rtol: float = Field(default=1e-10, gt=0)
    cg_max_iter: int = Field(default=20000, ge=1)


class PhantomConfig(_Section):
    """Distribution of random contrast regions"""

    min_radius: float = Field(default=0.5, gt=0)
    max_radius: float = Field(default=1.0, gt=0)
    min_regions: int = Field(default=1, ge=1)
    max_regions: int = Field(default=2, ge=1)
    multipliers: List[int] = Field(default_factory=lambda: [3, 4, 5])
    allow_overlap: bool = False
    max_retries: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "PhantomConfig":
        if self.min_radius > self.max_radius:
            raise ValueError("min_radius must not exceed max_radius")
        if self.min_regions > self.max_regions:
            raise ValueError("min_regions must not exceed max_regions")
        if not self.multipliers or any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be a non-empty list of positive integers")
        return self


class DatasetConfig(_Section):
    """Dataset generation"""

    n_samples: int = Field(default=1500, ge=1)
    noise_levels: List[float] = Field(default_factory=lambda: [0.0])
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)

    @field_validator("noise_levels")
    @classmethod
    def _non_negative(cls, levels: List[float]) -> List[float]:
        if any(level < 0 for level in levels):
            raise ValueError("noise levels must be non-negative")
        return levels


class RytovConfig(_Section):
    """Sensitivity matrix assembly"""

    kernel: Literal["rytov", "full"] = "rytov"
    single_precision: bool = False


class ElasticNetConfig(_Section):
    """Elastic Net regression on the linearized system"""

    theta: float = Field(default=0.5, ge=0.0, le=1.0)
    alpha: Optional[float] = Field(default=None, gt=0)
    alpha_grid: Optional[List[float]] = None
    n_alphas: int = Field(default=20, ge=1)
    alpha_ratio: float = Field(default=1e-4, gt=0, lt=1)
    cv_folds: int = Field(default=5, ge=2)
    max_iter: int = Field(default=10000, ge=1)
    tol: float = Field(default=1e-8, gt=0)
    standardize: bool = False
    nonnegative: bool = False
    seed: int = Field(default=0, ge=0)

    @field_validator("alpha_grid")
    @classmethod
    def _descending_positive(cls, grid: Optional[List[float]]) -> Optional[List[float]]:
        if grid is None:
            return grid
        if not grid or any(a <= 0 for a in grid):
            raise ValueError("alpha_grid must contain positive values")
        if any(later > earlier for earlier, later in zip(grid, grid[1:])):
            raise ValueError("alpha_grid must be descending")
        return grid


class BregmanConfig(_Section):
    """Bregman iterations with l1 regularizer"""

    alpha: Optional[float] = Field(default=None, gt=0)
    alpha_fraction: float = Field(default=0.5, gt=0)
    outer_iters: int = Field(default=20, ge=1)
    inner_max_iter: int = Field(default=500, ge=1)
    inner_tol: float = Field(default=1e-8, gt=0)
    tau: float = Field(default=1.0, gt=0)
    noise_level: Optional[float] = Field(default=None, ge=0)
    nonnegative: bool = False


class SpectralConfig(_Section):
    """SVD filter reconstructions (Tikhonov and truncated SVD)"""

    alpha: Optional[float] = Field(default=None, ge=0)
    alpha_fraction: float = Field(default=1e-4, gt=0)
    rank: Optional[int] = Field(default=None, ge=1)


class TrainConfig(_Section):
    """Network training"""

    batch_size: int = Field(default=64, ge=1)
    lr: float = Field(default=5e-5, gt=0)
    epochs_data_ae: int = Field(default=500, ge=1)
    epochs_signal_ae: int = Field(default=10000, ge=1)
    epochs_coupled: int = Field(default=10000, ge=1)
    epochs_denoiser: int = Field(default=500, ge=1)
    loss_variant: Literal["mse", "mse-l1", "mse-ae"] = "mse"
    l1_weight: float = Field(default=1e-3, ge=0)
    l1_signed: bool = False
    noise_level: float = Field(default=0.0, ge=0)
    seed: int = Field(default=0, ge=0)
    shuffle: bool = True
    validation_fraction: float = Field(default=0.1, ge=0, lt=1)
    checkpoint_every: int = Field(default=0, ge=0)
    latent_size: int = Field(default=800, ge=1)
    dtype: Literal["float32", "float64"] = "float32"


class MetricsConfig(_Section):
    """Evaluation indices"""

    threshold_fraction: float = Field(default=0.5, gt=0, lt=1)
    detection_ratio: float = Field(default=1.5, gt=1)
    ssim_window: int = Field(default=11, ge=3)
    ssim_sigma: float = Field(default=1.5, gt=0)
    ssim_k1: float = Field(default=0.01, gt=0)
    ssim_k2: float = Field(default=0.03, gt=0)
    histogram_bins: int = Field(default=20, ge=1)


class RunConfig(BaseSettings):
    """Configuration for every workbench stage"""

    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    optics: OpticalConfig = Field(default_factory=OpticalConfig)
    forward: ForwardConfig = Field(default_factory=ForwardConfig)
    phantom: PhantomConfig = Field(default_factory=PhantomConfig)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    rytov: RytovConfig = Field(default_factory=RytovConfig)
    elastic_net: ElasticNetConfig = Field(default_factory=ElasticNetConfig)
    bregman: BregmanConfig = Field(default_factory=BregmanConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)

    # Logging and telemetry
    log_level: str = "INFO"
    metrics_file: Optional[str] = None
    deterministic: bool = False

    model_config = SettingsConfigDict(
        env_prefix="DOT_",
        env_nested_delimiter="__",
        extra="forbid",
        frozen=True,
    )

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, level: str) -> str:
        if level.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {level}")
        return level.upper()


def _format_location(loc: tuple) -> str:
    return ".".join(str(part) for part in loc)


def load_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> RunConfig:
    """
    Load a run configuration from a TOML file.

    Args:
        path: TOML file; ``None`` uses the built-in defaults
        overrides: top-level sections or keys that replace file values

    Returns:
        RunConfig: validated configuration

    Raises:
        ConfigError: unreadable file, TOML syntax error or unknown/invalid keys
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except FileNotFoundError as e:
            raise ConfigError("Configuration file not found", path=str(path)) from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"Invalid TOML: {e}", path=str(path)) from e

    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key] = {**data[key], **value}
        else:
            data[key] = value

    try:
        return RunConfig(**data)
    except ValidationError as e:
        problems = []
        for error in e.errors():
            location = _format_location(error["loc"])
            if error["type"] == "extra_forbidden":
                problems.append(f"unknown key '{location}'")
            else:
                problems.append(f"'{location}': {error['msg']}")
        raise ConfigError("Invalid configuration: " + "; ".join(problems)) from e


def dump_config(config: RunConfig) -> Dict[str, Any]:
    """Plain-data echo of a configuration, suitable for manifests"""
    return config.model_dump(mode="json")

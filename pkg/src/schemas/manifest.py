from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

from .results import SolverInfo

MANIFEST_VERSION = 1


class Normalization(BaseModel):
    """Statistics mapping physical arrays to network inputs and targets"""
    mu_a_background: float
    image_divisor: float
    sinogram_log_min: float
    sinogram_log_max: float


class SampleRecord(BaseModel):
    """One dataset sample and the files holding it"""
    id: str
    index: int
    seed: int
    phantom: Dict[str, Any]
    image: str
    sinogram: str
    noisy: Dict[str, str] = Field(default_factory=dict)


class DatasetManifest(BaseModel):
    """Index of a generated dataset directory"""
    format_version: int = MANIFEST_VERSION
    kind: Literal["train", "test", "ood"] = "train"
    n_samples: int
    image_shape: List[int]
    sinogram_shape: List[int]
    active_voxels: int
    master_seed: int
    noise_levels: List[float]
    normalization: Normalization
    background: str
    mask: str
    config: Dict[str, Any]
    samples: List[SampleRecord]

    def sample(self, sample_id: str) -> SampleRecord:
        for record in self.samples:
            if record.id == sample_id:
                return record
        raise KeyError(sample_id)


class LayerRecord(BaseModel):
    """Layer entry of a checkpoint manifest"""
    kind: str
    params: Dict[str, Any] = Field(default_factory=dict)
    output_shape: List[int]
    parameter_count: int


class NetworkRecord(BaseModel):
    """Serialized network description"""
    name: str
    input_shape: List[int]
    output_shape: List[int]
    parameter_count: int
    layers: List[LayerRecord]


class CheckpointManifest(BaseModel):
    """Index of a training checkpoint directory"""
    format_version: int = MANIFEST_VERSION
    architecture: str
    loss_variant: str
    noise_level: float
    epoch: int
    phase: str
    latent_layout: str = "row-major [4, 10, 20]"
    networks: List[NetworkRecord]
    parameters: Dict[str, str]
    optimizer: Dict[str, Any] = Field(default_factory=dict)
    rng_state: Optional[Dict[str, Any]] = None
    normalization: Optional[Normalization] = None
    image_shape: List[int]
    mask: Optional[str] = None
    config: Dict[str, Any] = Field(default_factory=dict)


class ReconstructionRecord(BaseModel):
    """One reconstructed sample"""
    id: str
    image: str
    preview: str
    raw: Optional[str] = None
    info: Optional[SolverInfo] = None


class ReconstructionManifest(BaseModel):
    """Index of a reconstruction output directory; images hold mu_a in cm^-1"""
    format_version: int = MANIFEST_VERSION
    method: str
    noise_level: float
    dataset: str
    image_shape: List[int]
    samples: List[ReconstructionRecord]

    def record(self, sample_id: str) -> ReconstructionRecord:
        for record in self.samples:
            if record.id == sample_id:
                return record
        raise KeyError(sample_id)

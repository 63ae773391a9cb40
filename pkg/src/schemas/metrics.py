from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class BinStatistics(BaseModel):
    """Reconstructed coefficient inside true regions of one contrast level"""
    mean: float
    std: float
    count: int
    truth: float


class SampleMetrics(BaseModel):
    """Quality indices of one reconstruction"""
    id: str
    tpr: Optional[float] = None
    abe: float
    mse: float
    mse_physical: float
    ssim: float
    acr: Dict[str, BinStatistics] = Field(default_factory=dict)


class Aggregate(BaseModel):
    mean: Optional[float] = None
    std: Optional[float] = None
    count: int = 0


class MetricReport(BaseModel):
    """Per-sample indices and their means and standard deviations"""
    method: str = ""
    noise_level: Optional[float] = None
    samples: List[SampleMetrics]
    aggregate: Dict[str, Aggregate] = Field(default_factory=dict)
    acr: Dict[str, BinStatistics] = Field(default_factory=dict)
    histogram: Optional[Dict[str, List[float]]] = None

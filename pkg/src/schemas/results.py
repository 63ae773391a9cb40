from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class CheckResult(BaseModel):
    """Outcome of a structural check on a workbench artifact"""
    passed: bool
    message: Optional[str] = None
    warnings: Optional[List[str]] = None


class SolverInfo(BaseModel):
    """Convergence record of an iterative or direct solve"""
    method: str
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0
    alpha: Optional[float] = None
    extra: Dict[str, float] = Field(default_factory=dict)


class EpochRecord(BaseModel):
    """One row of a training loss history"""
    phase: str
    epoch: int
    loss: float
    val_loss: Optional[float] = None

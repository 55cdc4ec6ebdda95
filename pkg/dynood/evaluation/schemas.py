from typing import List, Optional

from pydantic import BaseModel, Field


class EvalReport(BaseModel):
    """One reported cell: mean over seeds, and the drop between in-distribution and OOD tests."""

    metric: str
    value: float = Field(..., description="Mean over seeds without the shift (w/o OOD)")
    std: float = Field(0.0, ge=0, description="Sample standard deviation over seeds")
    value_ood: Optional[float] = Field(None, description="Mean over seeds under the shift (w/ OOD)")
    std_ood: Optional[float] = None
    delta: Optional[float] = None
    delta_pct: Optional[float] = Field(None, description="100 * delta / value, only when value > 0")
    seeds: List[int] = Field(default_factory=list)
    per_seed: List[float] = Field(default_factory=list)
    per_seed_ood: List[float] = Field(default_factory=list)


class SeriesPoint(BaseModel):
    x: float
    mean: float
    std: float = 0.0

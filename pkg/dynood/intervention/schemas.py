from enum import Enum
from typing import List, NamedTuple, Tuple

import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .config import (
    DEFAULT_GENERATED_FRACTION,
    DEFAULT_GENERATED_PER_TIMESTAMP,
    DEFAULT_RATIO,
    DEFAULT_ROUNDS,
)


class InterventionScope(str, Enum):
    LAST = "last"  # only the final timestamp read by the task loss
    ALL = "all"    # every timestamp read by the task loss


class InterventionConfig(BaseModel):
    rounds: int = Field(DEFAULT_ROUNDS, ge=2, description="S, independent intervention rounds")
    ratio: float = Field(DEFAULT_RATIO, gt=0, le=1, description="s, fraction of nodes intervened")
    generated_fraction: float = Field(DEFAULT_GENERATED_FRACTION, ge=0, le=1)
    generated_per_timestamp: int = Field(DEFAULT_GENERATED_PER_TIMESTAMP, ge=0)
    match_timestamp: bool = Field(False, description="Restrict draws to samples of the target's timestamp")
    scope: InterventionScope = InterventionScope.LAST


class SampleSource(str, Enum):
    OBSERVED = "observed"
    GENERATED = "generated"


class SampleLibrary(BaseModel):
    """Replacement pool: observed node vectors plus ESVAE-generated instances, tagged by timestamp."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    observed: torch.Tensor                # M_ob x d'
    observed_timestamps: torch.Tensor     # M_ob, 1-based
    observed_nodes: torch.Tensor          # M_ob
    generated: torch.Tensor               # M_ge x d'
    generated_timestamps: torch.Tensor    # M_ge, 1-based
    seed: int = 0

    @field_validator("observed", "generated")
    @classmethod
    def _finite(cls, value: torch.Tensor):
        if value.dim() != 2:
            raise ValueError(f"library vectors must be a matrix, got shape {tuple(value.shape)}")
        if not torch.isfinite(value).all():
            raise ValueError("library vectors must be finite")
        return value

    @property
    def dim(self) -> int:
        return self.observed.shape[1] if len(self.observed) else self.generated.shape[1]

    @property
    def size(self) -> int:
        return len(self.observed) + len(self.generated)

    def is_empty(self) -> bool:
        return self.size == 0


class InterventionPlan(BaseModel):
    targets: Tuple[Tuple[int, int], ...] = Field(..., description="(node, timestamp) pairs, timestamps 1-based")
    ratio: float = Field(DEFAULT_RATIO, gt=0, le=1)
    rounds: int = Field(DEFAULT_ROUNDS, ge=2)


class Replacements(NamedTuple):
    vectors: torch.Tensor        # K x d', detached
    sources: List[SampleSource]
    sample_ids: torch.Tensor     # index into the library part named by ``sources``


class RiskResult(NamedTuple):
    value: torch.Tensor
    round_losses: torch.Tensor
    trace: List[dict]

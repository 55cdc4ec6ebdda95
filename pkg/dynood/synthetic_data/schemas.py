from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..graph_core.schemas import DynamicGraph
from ..shared.kv_config import parse_range
from .config import (
    ENV_FACTORS,
    ENV_FEATURE_DIM,
    ENV_HIGH_NOISE,
    ENV_LOW_NOISE,
    ENV_NODES,
    ENV_OOD_TAG,
    ENV_TARGET_DEGREE,
    ENV_TIMESTAMPS,
    FACTOR_DIM,
    FACTOR_INIT_STD,
    FACTOR_LEARNING_RATE,
    FACTOR_MAX_ITERATIONS,
    FACTOR_MIN_ITERATIONS,
    FACTOR_TOLERANCE,
    FACTOR_WEIGHT_DECAY,
    SBM_BLOCKS,
    SBM_FEATURE_DIM,
    SBM_INVARIANT_WEIGHT,
    SBM_NODES,
    SBM_P_INTER,
    SBM_P_INTRA,
    SBM_TIMESTAMPS,
)


class GeneratorKind(str, Enum):
    SBM = "sbm"
    FEATURE_SHIFT = "feature_shift"
    ENV_SUITE = "env_suite"


class EnvMode(str, Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


def _range(value):
    return parse_range(value) if isinstance(value, str) else value


class SbmSpec(BaseModel):
    generator: GeneratorKind = GeneratorKind.SBM
    num_nodes: int = Field(SBM_NODES, ge=2)
    num_timestamps: int = Field(SBM_TIMESTAMPS, ge=3)
    blocks: int = Field(SBM_BLOCKS, ge=1, description="C, number of classes")
    p_intra: float = Field(SBM_P_INTRA, ge=0, le=1)
    p_inter: float = Field(SBM_P_INTER, ge=0, le=1)
    invariant_weight: float = Field(SBM_INVARIANT_WEIGHT, ge=0, le=1, description="w_inv; w_var = 1 - w_inv")
    shift_level: float = Field(..., ge=0, le=1)
    feature_dim: int = Field(SBM_FEATURE_DIM, ge=1)
    train_range: Tuple[int, int] = (1, 4)
    val_range: Tuple[int, int] = (5, 6)
    test_range: Tuple[int, int] = (7, 8)
    seed: int = 0

    @field_validator("train_range", "val_range", "test_range", mode="before")
    @classmethod
    def _parse_range(cls, value):
        return _range(value)

    @model_validator(mode="after")
    def _ranges_fit(self):
        ends = [self.train_range, self.val_range, self.test_range]
        if any(start < 1 or end > self.num_timestamps or end < start for start, end in ends):
            raise ValueError(f"split ranges must lie within 1..{self.num_timestamps}")
        if not (self.train_range[1] < self.val_range[0] and self.val_range[1] < self.test_range[0]):
            raise ValueError("split ranges must be disjoint and ordered train < val < test")
        return self


class FeatureShiftSpec(BaseModel):
    generator: GeneratorKind = GeneratorKind.FEATURE_SHIFT
    base_dataset: str = Field("", description="EVG1 file of the base graph")
    p_bar: float = Field(..., ge=0, le=1)
    sigma: float = Field(..., ge=0)
    feature_dim: int = Field(FACTOR_DIM, ge=1)
    max_iterations: int = Field(FACTOR_MAX_ITERATIONS, ge=1)
    min_iterations: int = Field(FACTOR_MIN_ITERATIONS, ge=0)
    learning_rate: float = Field(FACTOR_LEARNING_RATE, gt=0)
    weight_decay: float = Field(FACTOR_WEIGHT_DECAY, ge=0)
    init_std: float = Field(FACTOR_INIT_STD, gt=0)
    tolerance: float = Field(FACTOR_TOLERANCE, gt=0)
    seed: int = 0


class EnvSuiteSpec(BaseModel):
    generator: GeneratorKind = GeneratorKind.ENV_SUITE
    mode: EnvMode = EnvMode.STATIONARY
    num_nodes: int = Field(ENV_NODES, ge=4)
    num_timestamps: int = Field(ENV_TIMESTAMPS, ge=3, description="T, also the period in sin(4T)")
    factors: int = Field(ENV_FACTORS, ge=1, description="K hidden variables")
    gamma_inv: float = Field(0.5, ge=0, le=1)
    gamma_dyn: float = Field(0.0, ge=0, le=1)
    feature_dim: int = Field(ENV_FEATURE_DIM, ge=1)
    mu_sta: float = 0.0
    sigma_sta: float = Field(1.0, gt=0)
    mu_dyn: float = 0.0
    sigma_dyn: float = Field(1.0, gt=0)
    low_noise: float = Field(ENV_LOW_NOISE, ge=0)
    high_noise: float = Field(ENV_HIGH_NOISE, ge=0)
    target_degree: float = Field(ENV_TARGET_DEGREE, gt=0)
    per_step_sin: bool = Field(False, description="Use sin(4t) instead of the constant sin(4T)")
    ood_tag: str = Field(ENV_OOD_TAG, description="Provenance tag withheld from train/val (stationary mode)")
    seed: int = 0

    @model_validator(mode="after")
    def _noise_ordered(self):
        if self.low_noise > self.high_noise:
            raise ValueError("low_noise must not exceed high_noise")
        return self


class GeneratedDataset(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    graph: DynamicGraph
    splits: Dict[str, Tuple[int, int]]
    ood_rule: str = ""
    clipped: int = Field(0, description="Edge probabilities clipped into [0, 1]")
    extras: Dict[str, object] = Field(default_factory=dict)
    task: Optional[str] = None

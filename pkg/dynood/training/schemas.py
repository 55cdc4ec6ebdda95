from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..esvae.config import (
    DEFAULT_ALPHA,
    DEFAULT_CLUSTERS,
    DEFAULT_DECODER_HIDDEN,
    DEFAULT_DYNAMIC_DIM,
    DEFAULT_MARGIN,
    DEFAULT_STATIC_DIM,
    DEFAULT_TOP_K,
    KMEANS_RESTARTS,
)
from ..esvae.schemas import ESVAEConfig
from ..graph_core.schemas import LabelKind
from ..intervention.config import (
    DEFAULT_GENERATED_FRACTION,
    DEFAULT_GENERATED_PER_TIMESTAMP,
    DEFAULT_RATIO,
    DEFAULT_ROUNDS,
)
from ..intervention.schemas import InterventionConfig, InterventionScope
from ..invariance.config import DEFAULT_CUTOFF, DEFAULT_DELTA
from ..invariance.schemas import InvarianceConfig
from ..shared.kv_config import parse_range
from ..st_encoder.config import DEFAULT_HEADS, DEFAULT_HIDDEN_DIM, DEFAULT_LAYERS
from ..st_encoder.schemas import Activation, EncoderConfig
from .config import DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE, DEFAULT_NEGATIVE_RATIO


class OptimizerKind(str, Enum):
    ADAM = "adam"
    SGD = "sgd"


class Ablation(str, Enum):
    NONE = "none"
    NO_INTERVENTION = "no-intervention"
    NO_ESVAE = "no-esvae"
    NO_IPR = "no-ipr"


class TrainConfig(BaseModel):
    """Every key of a train config file; sub-configs are derived from these flat keys."""

    dataset: str = Field("", description="Path of the EVG1 dataset")
    task: LabelKind = LabelKind.LINK_OCCURRENCE
    train_range: Tuple[int, int]
    val_range: Tuple[int, int]
    test_range: Tuple[int, int]

    epochs: int = Field(DEFAULT_EPOCHS, ge=1, description="E")
    learning_rate: float = Field(DEFAULT_LEARNING_RATE, gt=0)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    seed: int = 0
    negative_ratio: int = Field(DEFAULT_NEGATIVE_RATIO, ge=1, description="Negatives per positive edge")
    beta1: float = Field(DEFAULT_BETA1, ge=0, description="Weight of the risk-variance loss")
    beta2: float = Field(DEFAULT_BETA2, ge=0, description="Weight of the ESVAE loss")
    ablation: Ablation = Ablation.NONE
    ood_rule: str = Field("", description="Comma-separated provenance tags withheld from training and validation")

    hidden_dim: int = Field(DEFAULT_HIDDEN_DIM, gt=0)
    layers: int = Field(DEFAULT_LAYERS, ge=1)
    attention_heads: int = Field(DEFAULT_HEADS, ge=1)
    activation: Activation = Activation.RELU

    static_dim: int = Field(DEFAULT_STATIC_DIM, gt=0)
    dynamic_dim: int = Field(DEFAULT_DYNAMIC_DIM, gt=0)
    decoder_hidden: int = Field(DEFAULT_DECODER_HIDDEN, gt=0)
    clusters: int = Field(DEFAULT_CLUSTERS, ge=1)
    top_k: int = Field(DEFAULT_TOP_K, ge=1)
    kmeans_restarts: int = Field(KMEANS_RESTARTS, ge=1)
    margin: float = Field(DEFAULT_MARGIN, ge=0)
    alpha1: float = Field(DEFAULT_ALPHA, ge=0)
    alpha2: float = Field(DEFAULT_ALPHA, ge=0)
    sequential_esvae: bool = True

    delta: float = Field(DEFAULT_DELTA, ge=0)
    cutoff: float = Field(DEFAULT_CUTOFF, gt=0, lt=1)
    per_timestamp_gates: bool = False
    use_gate: bool = True

    rounds: int = Field(DEFAULT_ROUNDS, ge=2, description="S")
    intervention_ratio: float = Field(DEFAULT_RATIO, gt=0, le=1)
    generated_fraction: float = Field(DEFAULT_GENERATED_FRACTION, ge=0, le=1)
    generated_per_timestamp: int = Field(DEFAULT_GENERATED_PER_TIMESTAMP, ge=0)
    match_timestamp: bool = False
    intervention_scope: InterventionScope = InterventionScope.LAST

    @field_validator("train_range", "val_range", "test_range", mode="before")
    @classmethod
    def _parse_range(cls, value):
        if isinstance(value, str):
            return parse_range(value)
        return value

    @model_validator(mode="after")
    def _ranges_ordered(self):
        ranges = [("train_range", self.train_range), ("val_range", self.val_range), ("test_range", self.test_range)]
        for name, (start, end) in ranges:
            if start < 1 or end < start:
                raise ValueError(f"{name} {start}-{end} must satisfy 1 <= a <= b")
        for (name_a, (_, end_a)), (name_b, (start_b, _)) in zip(ranges, ranges[1:]):
            if start_b <= end_a:
                raise ValueError(f"{name_a} and {name_b} must be disjoint and ordered")
        if self.top_k > self.clusters:
            raise ValueError(f"top_k={self.top_k} exceeds clusters={self.clusters}")
        if self.hidden_dim % self.attention_heads != 0:
            raise ValueError(f"attention_heads={self.attention_heads} must divide hidden_dim={self.hidden_dim}")
        return self

    def with_ablation(self, ablation: Ablation | str) -> "TrainConfig":
        """Config of an ablation variant; the variant name is kept in ``ablation``."""
        ablation = Ablation(ablation)
        update = {"ablation": ablation}
        if ablation == Ablation.NO_INTERVENTION:
            update["beta1"] = 0.0
        elif ablation == Ablation.NO_ESVAE:
            update["sequential_esvae"] = False
        elif ablation == Ablation.NO_IPR:
            update["use_gate"] = False
        return self.model_copy(update=update)

    def encoder_config(self, input_dim: int) -> EncoderConfig:
        return EncoderConfig(
            input_dim=input_dim, hidden_dim=self.hidden_dim, layers=self.layers,
            attention_heads=self.attention_heads, activation=self.activation, seed=self.seed,
        )

    def esvae_config(self) -> ESVAEConfig:
        return ESVAEConfig(
            static_dim=self.static_dim, dynamic_dim=self.dynamic_dim, decoder_hidden=self.decoder_hidden,
            clusters=self.clusters, top_k=self.top_k, kmeans_restarts=self.kmeans_restarts,
            margin=self.margin, alpha1=self.alpha1, alpha2=self.alpha2,
            sequential=self.sequential_esvae, seed=self.seed + 1,
        )

    def invariance_config(self) -> InvarianceConfig:
        return InvarianceConfig(
            delta=self.delta, cutoff=self.cutoff,
            per_timestamp_gates=self.per_timestamp_gates, use_gate=self.use_gate,
        )

    def intervention_config(self) -> InterventionConfig:
        return InterventionConfig(
            rounds=self.rounds, ratio=self.intervention_ratio, generated_fraction=self.generated_fraction,
            generated_per_timestamp=self.generated_per_timestamp, match_timestamp=self.match_timestamp,
            scope=self.intervention_scope,
        )

    def history_end(self) -> int:
        """Number of representation timestamps the training targets read."""
        end = self.train_range[1]
        return end - 1 if self.task == LabelKind.LINK_OCCURRENCE else end


class EpochRecord(BaseModel):
    epoch: int
    l_task: float
    l_risk: float
    l_svae: float
    l_s: float
    l_d: float
    val_metric: float
    l_total: float
    wall_time: float


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: object
    history: List[EpochRecord]
    best_epoch: int
    best_val: float
    library: Optional[object] = None
    pseudo_labels: Optional[object] = None

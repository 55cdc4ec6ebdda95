import hashlib
import json
from enum import Enum

import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import DEFAULT_HEADS, DEFAULT_HIDDEN_DIM, DEFAULT_LAYERS, NEGATIVE_SLOPE


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"
    TANH = "tanh"


class EncoderConfig(BaseModel):
    input_dim: int = Field(..., gt=0, description="Node feature dimension d")
    hidden_dim: int = Field(DEFAULT_HIDDEN_DIM, gt=0, description="Representation dimension d'")
    layers: int = Field(DEFAULT_LAYERS, ge=1, description="Number of spatial+temporal layers L")
    attention_heads: int = Field(DEFAULT_HEADS, ge=1)
    activation: Activation = Field(Activation.RELU, description="Activation of the feature projection")
    negative_slope: float = Field(NEGATIVE_SLOPE, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _heads_divide_hidden(self):
        if self.hidden_dim % self.attention_heads != 0:
            raise ValueError(
                f"attention_heads={self.attention_heads} must divide hidden_dim={self.hidden_dim}"
            )
        return self

    @property
    def rte_dim(self) -> int:
        return self.input_dim

    def fingerprint(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


class NodeRepresentationSequence(BaseModel):
    """Per-node, per-timestamp representations, shape N x T x d'."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: torch.Tensor
    produced_by: str = ""

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def num_timestamps(self) -> int:
        return self.values.shape[1]

    @property
    def dim(self) -> int:
        return self.values.shape[2]

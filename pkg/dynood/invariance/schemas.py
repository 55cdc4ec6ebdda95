from typing import NamedTuple

import torch
from pydantic import BaseModel, Field

from .config import DEFAULT_CUTOFF, DEFAULT_DELTA


class InvarianceConfig(BaseModel):
    delta: float = Field(DEFAULT_DELTA, ge=0, description="Variance threshold of the gate")
    cutoff: float = Field(DEFAULT_CUTOFF, gt=0, lt=1, description="M_I cutoff separating P_I from P_V")
    per_timestamp_gates: bool = Field(False, description="One gate per (node, timestamp) instead of per node")
    use_gate: bool = Field(True, description="False forces the gate to ones (masks from W_I alone)")
    layer_norm: bool = Field(True, description="Layer-normalise H before measuring variance")


class MaskPair(NamedTuple):
    gate: torch.Tensor        # {0, 1}, ... x d'
    weights: torch.Tensor     # W_I, d'
    invariant: torch.Tensor   # M_I = gate * sigmoid(W_I)
    variant: torch.Tensor     # M_V = 1 - M_I

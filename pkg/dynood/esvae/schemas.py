from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
import torch
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import (
    DEFAULT_ALPHA,
    DEFAULT_CLUSTERS,
    DEFAULT_DECODER_HIDDEN,
    DEFAULT_DYNAMIC_DIM,
    DEFAULT_MARGIN,
    DEFAULT_STATIC_DIM,
    DEFAULT_TOP_K,
    KMEANS_RESTARTS,
    LOGVAR_MAX,
    LOGVAR_MIN,
)


class ESVAEConfig(BaseModel):
    static_dim: int = Field(DEFAULT_STATIC_DIM, gt=0, description="k_s")
    dynamic_dim: int = Field(DEFAULT_DYNAMIC_DIM, gt=0, description="k_d, also the recurrent hidden size")
    static_hidden: int = Field(16, gt=0, description="Hidden size of the order-sensitive time pooling")
    decoder_hidden: int = Field(DEFAULT_DECODER_HIDDEN, gt=0)
    clusters: int = Field(DEFAULT_CLUSTERS, ge=1, description="m")
    top_k: int = Field(DEFAULT_TOP_K, ge=1, description="k of the top-k pseudo label")
    kmeans_restarts: int = Field(KMEANS_RESTARTS, ge=1)
    margin: float = Field(DEFAULT_MARGIN, ge=0)
    alpha1: float = Field(DEFAULT_ALPHA, ge=0, description="Weight of the static triplet loss")
    alpha2: float = Field(DEFAULT_ALPHA, ge=0, description="Weight of the dynamic regularisation loss")
    samples: int = Field(1, ge=1, description="Reparameterised samples per ELBO term")
    sequential: bool = Field(True, description="False selects the shared non-sequential VAE")
    seed: int = 0

    @model_validator(mode="after")
    def _top_k_within_clusters(self):
        if self.top_k > self.clusters:
            raise ValueError(f"top_k={self.top_k} exceeds clusters={self.clusters}")
        return self


class GaussianParams(NamedTuple):
    """Diagonal Gaussian; trailing dimension is the event dimension."""

    mean: torch.Tensor
    log_variance: torch.Tensor

    def clamped(self) -> "GaussianParams":
        return GaussianParams(self.mean, self.log_variance.clamp(LOGVAR_MIN, LOGVAR_MAX))

    @property
    def std(self) -> torch.Tensor:
        return torch.exp(0.5 * self.log_variance.clamp(LOGVAR_MIN, LOGVAR_MAX))

    def at(self, index: int) -> "GaussianParams":
        return GaussianParams(self.mean[index], self.log_variance[index])

    @classmethod
    def standard(cls, shape, dtype=torch.float32) -> "GaussianParams":
        return cls(torch.zeros(shape, dtype=dtype), torch.zeros(shape, dtype=dtype))


class EnvPosterior(NamedTuple):
    static: GaussianParams    # k_s
    dynamic: GaussianParams   # T x k_d, row t computed from H^{<=t}

    @property
    def num_timestamps(self) -> int:
        return self.dynamic.mean.shape[0]


class SampleSource(str, Enum):
    POSTERIOR = "posterior"
    PRIOR = "prior"


class EnvSample(NamedTuple):
    e_s: torch.Tensor  # k_s
    e_d: torch.Tensor  # T x k_d
    source: SampleSource


class EnvNoise(NamedTuple):
    """Frozen standard-normal draws for the reparameterisation (samples x ...)."""

    static: torch.Tensor   # S x k_s
    dynamic: torch.Tensor  # S x T x k_d

    @classmethod
    def draw(cls, samples: int, static_dim: int, num_timestamps: int, dynamic_dim: int,
             generator: torch.Generator | None = None, dtype=torch.float32) -> "EnvNoise":
        return cls(
            torch.randn(samples, static_dim, generator=generator, dtype=dtype),
            torch.randn(samples, num_timestamps, dynamic_dim, generator=generator, dtype=dtype),
        )


class ELBOTerms(NamedTuple):
    total: torch.Tensor
    reconstruction: torch.Tensor
    kl_static: torch.Tensor
    kl_dynamic: torch.Tensor


class ESVAELoss(NamedTuple):
    total: torch.Tensor
    svae: torch.Tensor
    static: torch.Tensor
    dynamic: torch.Tensor


class PseudoLabelTask(BaseModel):
    """K-means clusters of nodes and, per timestamp, the top-k most uncertain clusters."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    cluster_assignment: np.ndarray = Field(..., description="N cluster ids, 0-based")
    targets: Tuple[Tuple[int, ...], ...] = Field(..., description="Per timestamp, top-k cluster ids")
    cluster_uncertainty: np.ndarray = Field(..., description="T x m mean structural entropy per cluster")
    clusters: int
    top_k: int

    @property
    def num_timestamps(self) -> int:
        return len(self.targets)

    def k_hot(self, dtype=torch.float32) -> torch.Tensor:
        target = torch.zeros(self.num_timestamps, self.clusters, dtype=dtype)
        for t, chosen in enumerate(self.targets):
            target[t, list(chosen)] = 1.0
        return target

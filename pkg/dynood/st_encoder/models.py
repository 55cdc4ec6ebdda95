import logging
import math
from typing import NamedTuple, Sequence

import torch
import torch.nn.functional as F
from torch import nn

from ..shared.exceptions import DimensionMismatchError, NumericalError
from .config import RTE_BASE
from .schemas import Activation, EncoderConfig

logger = logging.getLogger(__name__)


class SnapshotTensors(NamedTuple):
    features: torch.Tensor   # N x d
    edge_index: torch.Tensor  # 2 x E, (source, destination), both directions


def relative_time_encoding(t: int, dim: int, dtype=torch.float32) -> torch.Tensor:
    """Fixed sinusoidal encoding of an integer timestamp."""
    position = torch.arange(dim, dtype=torch.float64)
    rates = torch.pow(RTE_BASE, -(2 * torch.div(position, 2, rounding_mode="floor")) / dim)
    angles = float(t) * rates
    encoding = torch.where(position % 2 == 0, torch.sin(angles), torch.cos(angles))
    return encoding.to(dtype)


def _activate(x: torch.Tensor, activation: Activation) -> torch.Tensor:
    if activation == Activation.RELU:
        return F.relu(x)
    if activation == Activation.TANH:
        return torch.tanh(x)
    return x


class FeatureProjection(nn.Module):
    """sigma(W1^T (x + RTE(t)) + b)."""

    def __init__(self, input_dim: int, hidden_dim: int, activation: Activation = Activation.RELU):
        super().__init__()
        self.input_dim = input_dim
        self.activation = activation
        self.linear = nn.Linear(input_dim, hidden_dim)

    def forward(self, x: torch.Tensor, t: int) -> torch.Tensor:
        if x.shape[-1] != self.input_dim:
            raise DimensionMismatchError(
                f"feature dimension {x.shape[-1]} does not match projection input {self.input_dim}"
            )
        rte = relative_time_encoding(t, self.input_dim, dtype=x.dtype)
        return _activate(self.linear(x + rte), self.activation)


class SpatialAttentionLayer(nn.Module):
    """z_v + sum_u a_(u,v) z_u with multi-head additive attention over the neighbourhood.

    Per-head weights are softmax-normalised per destination node and then averaged over heads.
    """

    def __init__(self, hidden_dim: int, heads: int, negative_slope: float = 0.2):
        super().__init__()
        self.heads = heads
        self.head_dim = hidden_dim // heads
        self.negative_slope = negative_slope
        self.proj = nn.Linear(hidden_dim, hidden_dim, bias=False)
        self.att_src = nn.Parameter(torch.empty(heads, self.head_dim))
        self.att_dst = nn.Parameter(torch.empty(heads, self.head_dim))

    def attention_weights(self, z: torch.Tensor, edge_index: torch.Tensor) -> torch.Tensor:
        """Head-averaged attention weight of every edge in ``edge_index`` (length E)."""
        n = z.shape[0]
        src, dst = edge_index[0], edge_index[1]
        wz = self.proj(z).view(n, self.heads, self.head_dim)
        score_src = (wz * self.att_src).sum(dim=-1)
        score_dst = (wz * self.att_dst).sum(dim=-1)
        scores = F.leaky_relu(score_src[src] + score_dst[dst], self.negative_slope)
        # stable softmax per destination
        index = dst.unsqueeze(-1).expand(-1, self.heads)
        peak = torch.full((n, self.heads), -math.inf, dtype=z.dtype).scatter_reduce(
            0, index, scores.detach(), reduce="amax", include_self=False
        )
        weights = torch.exp(scores - peak[dst])
        denominator = torch.zeros((n, self.heads), dtype=z.dtype).index_add(0, dst, weights)
        return (weights / denominator[dst]).mean(dim=-1)

    def forward(self, z: torch.Tensor, edge_index: torch.Tensor) -> torch.Tensor:
        if edge_index.numel() == 0:
            return z.clone()
        alpha = self.attention_weights(z, edge_index)
        src, dst = edge_index[0], edge_index[1]
        messages = alpha.unsqueeze(-1) * z[src]
        return z + torch.zeros_like(z).index_add(0, dst, messages)


def temporal_aggregate(z_hat: torch.Tensor) -> torch.Tensor:
    """Running mean over the causal prefix: h^t = (1/t) sum_{tau<=t} z_hat^tau (dim 1 is time)."""
    counts = torch.arange(1, z_hat.shape[1] + 1, dtype=z_hat.dtype).view(1, -1, 1)
    return torch.cumsum(z_hat, dim=1) / counts


class SpatioTemporalEncoder(nn.Module):
    def __init__(self, cfg: EncoderConfig):
        super().__init__()
        self.cfg = cfg
        self.projection = FeatureProjection(cfg.input_dim, cfg.hidden_dim, cfg.activation)
        self.layers = nn.ModuleList(
            SpatialAttentionLayer(cfg.hidden_dim, cfg.attention_heads, cfg.negative_slope)
            for _ in range(cfg.layers)
        )
        self.reset_parameters()

    def reset_parameters(self) -> None:
        with torch.random.fork_rng():
            torch.manual_seed(self.cfg.seed)
            nn.init.xavier_uniform_(self.projection.linear.weight)
            nn.init.zeros_(self.projection.linear.bias)
            for layer in self.layers:
                nn.init.xavier_uniform_(layer.proj.weight)
                nn.init.xavier_uniform_(layer.att_src)
                nn.init.xavier_uniform_(layer.att_dst)

    def project(self, snapshots: Sequence[SnapshotTensors]) -> torch.Tensor:
        return torch.stack(
            [self.projection(snap.features, t) for t, snap in enumerate(snapshots, start=1)], dim=1
        )

    def forward(self, snapshots: Sequence[SnapshotTensors]) -> torch.Tensor:
        z = self.project(snapshots)
        for depth, layer in enumerate(self.layers, start=1):
            z_hat = torch.stack(
                [layer(z[:, t], snap.edge_index) for t, snap in enumerate(snapshots)], dim=1
            )
            z = temporal_aggregate(z_hat)
            finite = torch.isfinite(z).all(dim=2).all(dim=0)
            if not bool(finite.all()):
                bad = int(torch.nonzero(~finite)[0]) + 1
                raise NumericalError("non-finite encoder output", layer=depth, timestamp=bad)
        return z

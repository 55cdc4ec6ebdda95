"""Invariant/variant dimension masks."""
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..shared.exceptions import ContractViolation
from .config import W_I_INIT, W_I_INIT_UNGATED
from .schemas import InvarianceConfig, MaskPair

logger = logging.getLogger(__name__)


def init_invariant_gate(h_prefix: torch.Tensor, delta: float) -> torch.Tensor:
    """1 where the population variance over the history (dim -2) is <= delta.

    ``h_prefix`` is t x d' for one node or N x t x d' for many.
    """
    if h_prefix.shape[-2] < 1:
        raise ContractViolation("gate needs at least one timestamp of history")
    variance = h_prefix.detach().var(dim=-2, unbiased=False)
    return (variance <= delta).to(h_prefix.dtype)


def masks(h_prefix: torch.Tensor, delta: float, W_I: torch.Tensor) -> MaskPair:
    return masks_from_gate(init_invariant_gate(h_prefix, delta), W_I)


def masks_from_gate(gate: torch.Tensor, W_I: torch.Tensor) -> MaskPair:
    if W_I.shape[-1] != gate.shape[-1]:
        raise ContractViolation(f"W_I has dimension {W_I.shape[-1]}, gate has {gate.shape[-1]}")
    invariant = gate * torch.sigmoid(W_I)
    return MaskPair(gate=gate, weights=W_I, invariant=invariant, variant=1.0 - invariant)


def split(h: torch.Tensor, pair: MaskPair) -> Tuple[torch.Tensor, torch.Tensor]:
    if h.shape[-1] != pair.invariant.shape[-1]:
        raise ContractViolation(f"h has dimension {h.shape[-1]}, masks have {pair.invariant.shape[-1]}")
    return pair.invariant * h, pair.variant * h


def variant_mask(pair: MaskPair, cutoff: float) -> torch.Tensor:
    """Boolean P_V membership, same shape as M_I."""
    return ~(pair.invariant > cutoff)


def pattern_indices(pair: MaskPair, cutoff: float) -> Tuple[List[int], List[int]]:
    """(P_I, P_V) index sets of a single mask vector."""
    invariant = pair.invariant.detach().reshape(-1, pair.invariant.shape[-1])
    if invariant.shape[0] != 1:
        raise ContractViolation("pattern_indices expects the masks of a single node")
    chosen = (invariant[0] > cutoff).tolist()
    p_i = [dim for dim, flag in enumerate(chosen) if flag]
    p_v = [dim for dim, flag in enumerate(chosen) if not flag]
    return p_i, p_v


class InvariantMask(nn.Module):
    """Holds the shared learnable W_I and the per-node gate, refreshed from H (not trained)."""

    def __init__(self, rep_dim: int, cfg: InvarianceConfig):
        super().__init__()
        self.cfg = cfg
        self.W_I = nn.Parameter(torch.full((rep_dim,), W_I_INIT if cfg.use_gate else W_I_INIT_UNGATED))
        self.register_buffer("gate", torch.ones(0, rep_dim))

    @torch.no_grad()
    def refresh(self, H: torch.Tensor) -> torch.Tensor:
        """Recompute the gate from the current N x T x d' representations."""
        H = H.detach()
        if not self.cfg.use_gate:
            shape = H.shape if self.cfg.per_timestamp_gates else (H.shape[0], H.shape[2])
            self.gate = torch.ones(shape, dtype=H.dtype)
            return self.gate
        if self.cfg.layer_norm:
            H = F.layer_norm(H, H.shape[-1:])
        if self.cfg.per_timestamp_gates:
            gates = [init_invariant_gate(H[:, : t + 1], self.cfg.delta) for t in range(H.shape[1])]
            self.gate = torch.stack(gates, dim=1)
        else:
            self.gate = init_invariant_gate(H, self.cfg.delta)
        logger.debug(f"Gate refreshed: {float(self.gate.mean()):.3f} of dimensions open")
        return self.gate

    def pair(self) -> MaskPair:
        if self.gate.numel() == 0:
            raise ContractViolation("gate has not been computed; call refresh(H) first")
        return masks_from_gate(self.gate, self.W_I)

    def expand(self, pair: MaskPair, H: torch.Tensor) -> MaskPair:
        """Broadcast per-node masks over the time axis of an N x T x d' tensor."""
        if pair.invariant.dim() == H.dim():
            # per-timestamp gates; timestamps past the refreshed history reuse the last gate
            steps = H.shape[1]
            index = torch.clamp(torch.arange(steps), max=pair.gate.shape[1] - 1)
            return MaskPair(
                pair.gate[:, index], pair.weights, pair.invariant[:, index], pair.variant[:, index]
            )
        return MaskPair(
            pair.gate.unsqueeze(1), pair.weights, pair.invariant.unsqueeze(1), pair.variant.unsqueeze(1)
        )

    def forward(self, H: torch.Tensor):
        pair = self.expand(self.pair(), H)
        h_i, h_v = split(H, pair)
        return h_i, h_v, pair


def export_mask_text(invariant: Union[torch.Tensor, np.ndarray], path: str | Path) -> None:
    """Node x dimension matrix of M_I (per-timestamp gates are exported at the last timestamp)."""
    values = invariant.detach().cpu().numpy() if isinstance(invariant, torch.Tensor) else np.asarray(invariant)
    if values.ndim == 3:
        values = values[:, -1]
    np.savetxt(path, values, fmt="%.6f")


def as_index_mask(indices: Sequence[int], dim: int) -> torch.Tensor:
    out = torch.zeros(dim, dtype=torch.bool)
    for index in indices:
        if not 0 <= index < dim:
            raise ContractViolation(f"index {index} outside 0..{dim - 1}")
        out[index] = True
    return out

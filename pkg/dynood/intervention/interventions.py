"""Node-wise replacement of variant dimensions and the risk-variance loss."""
import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import pandas as pd
import torch

from ..invariance.schemas import MaskPair
from ..shared.exceptions import ConfigurationError, ContractViolation, NumericalError
from .config import TRACE_COLUMNS
from .schemas import InterventionConfig, InterventionPlan, Replacements, RiskResult, SampleLibrary, SampleSource

logger = logging.getLogger(__name__)

IndexSet = Union[torch.Tensor, Sequence[int]]


def _variant_mask(P_V: IndexSet, dim: int) -> torch.Tensor:
    if isinstance(P_V, torch.Tensor) and P_V.dtype == torch.bool:
        if P_V.shape[-1] != dim:
            raise ContractViolation(f"variant mask has dimension {P_V.shape[-1]}, vector has {dim}")
        return P_V
    mask = torch.zeros(dim, dtype=torch.bool)
    for index in (P_V.tolist() if isinstance(P_V, torch.Tensor) else P_V):
        if not 0 <= int(index) < dim:
            raise ContractViolation(f"variant index {index} outside 0..{dim - 1}")
        mask[int(index)] = True
    return mask


def intervene(h: torch.Tensor, P_V: IndexSet, s: torch.Tensor) -> torch.Tensor:
    """h with the P_V coordinates taken from s; h itself is left untouched."""
    if s.shape[-1] != h.shape[-1]:
        raise ContractViolation(f"replacement has dimension {s.shape[-1]}, h has {h.shape[-1]}")
    mask = _variant_mask(P_V, h.shape[-1])
    return torch.where(mask, s.detach().to(h.dtype), h)


def draw_replacements(
    library: SampleLibrary,
    timestamps: torch.Tensor,
    cfg: InterventionConfig,
    generator: Optional[torch.Generator] = None,
) -> Replacements:
    """One replacement per target; generated samples are chosen with probability generated_fraction."""
    if library.is_empty():
        raise ConfigurationError("cannot intervene with an empty sample library")
    count = len(timestamps)
    use_generated = torch.rand(count, generator=generator) < cfg.generated_fraction
    vectors = library.observed.new_zeros(count, library.dim)
    ids = torch.zeros(count, dtype=torch.long)
    sources: List[SampleSource] = [SampleSource.OBSERVED] * count

    for position in range(count):
        t = int(timestamps[position])
        for source in ((SampleSource.GENERATED, SampleSource.OBSERVED) if use_generated[position]
                       else (SampleSource.OBSERVED, SampleSource.GENERATED)):
            pool, stamps = (
                (library.generated, library.generated_timestamps) if source == SampleSource.GENERATED
                else (library.observed, library.observed_timestamps)
            )
            candidates = torch.arange(len(pool))
            if cfg.match_timestamp:
                candidates = candidates[stamps == t]
            if len(candidates) == 0:
                continue
            pick = candidates[torch.randint(len(candidates), (1,), generator=generator)].item()
            vectors[position] = pool[pick]
            ids[position] = pick
            sources[position] = source
            break
        else:
            raise ConfigurationError(f"no library sample available for timestamp {t}")
    return Replacements(vectors.detach(), sources, ids)


def _scatter_replacements(
    H: torch.Tensor,
    variant: torch.Tensor,
    plan: InterventionPlan,
    replacements: Replacements,
) -> Tuple[torch.Tensor, torch.Tensor]:
    """(replace, source): which coordinates of H a round rewrites, and with what."""
    nodes = torch.tensor([v for v, _ in plan.targets], dtype=torch.long)
    steps = torch.tensor([t - 1 for _, t in plan.targets], dtype=torch.long)
    if len(nodes) and (nodes.max() >= H.shape[0] or steps.max() >= H.shape[1] or steps.min() < 0):
        raise ContractViolation("intervention target outside the representation tensor")
    replace = torch.zeros(H.shape, dtype=torch.bool)
    source = H.new_zeros(H.shape)
    row_mask = variant[nodes] if variant.dim() == 2 else variant[nodes, steps]
    replace[nodes, steps] = row_mask
    source[nodes, steps] = replacements.vectors.to(H.dtype)
    return replace, source


def intervene_targets(
    H: torch.Tensor,
    variant: torch.Tensor,
    plan: InterventionPlan,
    replacements: Replacements,
) -> torch.Tensor:
    """Apply one round of replacements to an N x T x d' tensor.

    ``variant`` is the boolean P_V membership, N x d' or N x T x d'.
    """
    replace, source = _scatter_replacements(H, variant, plan, replacements)
    return torch.where(replace, source, H)


def intervene_masked(
    H: torch.Tensor,
    pair: MaskPair,
    variant: torch.Tensor,
    plan: InterventionPlan,
    replacements: Replacements,
) -> torch.Tensor:
    """M_I * H with the variant part of the targeted P_V coordinates set to the replacement.

    Replaced coordinates read ``M_I * h + M_V * s``; everything else stays ``M_I * h``, so a
    round without replacements scores exactly the invariant representation. ``pair`` must
    broadcast against H (see ``InvariantMask.expand``).
    """
    replace, source = _scatter_replacements(H, variant, plan, replacements)
    invariant = pair.invariant * H
    return torch.where(replace, invariant + pair.variant * source, invariant)


def risk_loss(
    round_loss: Callable[[torch.Tensor], torch.Tensor],
    H: torch.Tensor,
    variant: torch.Tensor,
    library: SampleLibrary,
    plan: InterventionPlan,
    cfg: InterventionConfig,
    seed: int = 0,
    replacements: Optional[List[Replacements]] = None,
    masks: Optional[MaskPair] = None,
) -> RiskResult:
    """Population variance of the task loss over ``plan.rounds`` intervention rounds.

    ``round_loss`` maps intervened representations to the expected task loss; it closes over
    the graph, labels and predictor. Each round draws from its own generator seeded from
    ``seed``, so results do not depend on evaluation order. Pre-drawn ``replacements`` may be
    passed to freeze the draws.

    Without ``masks`` the rounds see H with P_V replaced outright. With ``masks`` they see the
    invariant representation under the intervention (``intervene_masked``), which is what a
    predictor trained on M_I * H is scored on.
    """
    if plan.rounds < 2:
        raise ContractViolation("risk variance needs at least two rounds")
    if library.is_empty():
        raise ConfigurationError("cannot intervene with an empty sample library")
    stamps = torch.tensor([t for _, t in plan.targets], dtype=torch.long)
    if replacements is None:
        replacements = []
        for round_index in range(plan.rounds):
            generator = torch.Generator().manual_seed(seed * 7919 + round_index)
            replacements.append(draw_replacements(library, stamps, cfg, generator))

    losses = []
    trace = []
    for round_index, drawn in enumerate(replacements):
        if masks is None:
            intervened = intervene_targets(H, variant, plan, drawn)
        else:
            intervened = intervene_masked(H, masks, variant, plan, drawn)
        loss = round_loss(intervened)
        losses.append(loss)
        value = float(loss.detach())
        for (node, t), source, sample_id in zip(plan.targets, drawn.sources, drawn.sample_ids.tolist()):
            trace.append({"round": round_index, "node": node, "timestamp": t,
                          "source": source.value, "sample_id": sample_id, "loss": value})
    round_losses = torch.stack(losses)
    variance = round_losses.var(unbiased=False)
    if not torch.isfinite(variance):
        raise NumericalError("non-finite risk variance", rounds=plan.rounds)
    return RiskResult(variance, round_losses, trace)


def export_trace(trace: List[dict], path: str | Path) -> None:
    pd.DataFrame(trace, columns=TRACE_COLUMNS).to_csv(path, index=False)

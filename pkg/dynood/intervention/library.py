"""Sample libraries and intervention plans."""
import logging
from typing import Iterable, Optional

import torch

from ..esvae.generation import GeneratedSamples
from ..shared.exceptions import ContractViolation
from .schemas import InterventionPlan, SampleLibrary

logger = logging.getLogger(__name__)


def build_observed_library(H: torch.Tensor, seed: int = 0) -> SampleLibrary:
    """Flatten an N x T x d' tensor into N * T tagged vectors (row v * T + t - 1)."""
    if H.dim() != 3:
        raise ContractViolation(f"expected N x T x d' representations, got shape {tuple(H.shape)}")
    n, num_timestamps, dim = H.shape
    observed = H.detach().reshape(n * num_timestamps, dim).clone()
    stamps = torch.arange(1, num_timestamps + 1).repeat(n)
    nodes = torch.arange(n).repeat_interleave(num_timestamps)
    return SampleLibrary(
        observed=observed,
        observed_timestamps=stamps,
        observed_nodes=nodes,
        generated=observed.new_zeros(0, dim),
        generated_timestamps=torch.zeros(0, dtype=torch.long),
        seed=seed,
    )


def with_generated(library: SampleLibrary, samples: GeneratedSamples) -> SampleLibrary:
    if len(samples.vectors) and samples.vectors.shape[1] != library.dim:
        raise ContractViolation(
            f"generated samples have dimension {samples.vectors.shape[1]}, library has {library.dim}"
        )
    return library.model_copy(update={
        "generated": samples.vectors.detach().to(library.observed.dtype),
        "generated_timestamps": samples.timestamps,
    })


def plan_interventions(
    num_nodes: int,
    timestamps: Iterable[int],
    ratio: float,
    rounds: int,
    generator: Optional[torch.Generator] = None,
) -> InterventionPlan:
    """Pick round(ratio * N) nodes (at least one) at each timestamp."""
    count = max(1, int(round(ratio * num_nodes)))
    targets = []
    for t in timestamps:
        if count >= num_nodes:
            chosen = range(num_nodes)
        else:
            chosen = sorted(torch.randperm(num_nodes, generator=generator)[:count].tolist())
        targets.extend((int(v), int(t)) for v in chosen)
    return InterventionPlan(targets=tuple(targets), ratio=ratio, rounds=rounds)

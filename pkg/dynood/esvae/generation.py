from typing import NamedTuple, Optional

import torch

from .models import EnvironmentSVAE
from .schemas import GaussianParams


class GeneratedSamples(NamedTuple):
    vectors: torch.Tensor     # (T * count) x d'
    timestamps: torch.Tensor  # (T * count,), 1-based


@torch.no_grad()
def sample_generated_library(
    model: EnvironmentSVAE,
    num_timestamps: int,
    count: int,
    generator: Optional[torch.Generator] = None,
) -> GeneratedSamples:
    """Roll ``count`` environment chains forward through the prior and decode one h per step."""
    dtype = next(model.parameters()).dtype
    if count <= 0 or num_timestamps <= 0:
        return GeneratedSamples(torch.zeros(0, model.rep_dim, dtype=dtype), torch.zeros(0, dtype=torch.long))
    cfg = model.cfg
    e_s = torch.randn(count, cfg.static_dim, generator=generator, dtype=dtype)
    state = model.prior.initial_state(count)
    vectors, stamps = [], []
    for t in range(1, num_timestamps + 1):
        if cfg.sequential:
            prior = model.prior.emit(state)
        else:
            prior = GaussianParams.standard((count, cfg.dynamic_dim), dtype=dtype)
        e_d = prior.mean + prior.std * torch.randn(count, cfg.dynamic_dim, generator=generator, dtype=dtype)
        if cfg.sequential:
            state = model.prior.step(e_d, state)
        generated = model.decoder(e_s, e_d)
        h = generated.mean + generated.std * torch.randn(count, model.rep_dim, generator=generator, dtype=dtype)
        vectors.append(h)
        stamps.append(torch.full((count,), t, dtype=torch.long))
    return GeneratedSamples(torch.cat(vectors, dim=0), torch.cat(stamps, dim=0))

"""Losses of the environment sequential VAE."""
import math
from typing import Optional

import torch
import torch.nn.functional as F

from ..shared.exceptions import ContractViolation, NumericalError
from .config import LOGVAR_MAX, LOGVAR_MIN
from .models import EnvironmentSVAE
from .schemas import (
    ELBOTerms,
    EnvNoise,
    EnvPosterior,
    EnvSample,
    ESVAELoss,
    GaussianParams,
    PseudoLabelTask,
    SampleSource,
)


def reparameterize(p: GaussianParams, noise: torch.Tensor) -> torch.Tensor:
    """``mean + std * noise``; log sigma^2 is clamped to [LOGVAR_MIN, LOGVAR_MAX], so a vanishing
    variance leaves at most ``exp(LOGVAR_MIN / 2) * |noise|`` between the sample and the mean."""
    if noise.shape[-1] != p.mean.shape[-1]:
        raise ContractViolation(f"noise dimension {noise.shape[-1]} != {p.mean.shape[-1]}")
    return p.mean + p.std * noise


def kl_diag_gaussian(q: GaussianParams, p: Optional[GaussianParams] = None) -> torch.Tensor:
    """Elementwise KL(q || p) for diagonal Gaussians; ``p=None`` is N(0, I)."""
    q_logvar = q.log_variance.clamp(LOGVAR_MIN, LOGVAR_MAX)
    if p is None:
        return 0.5 * (torch.exp(q_logvar) + q.mean.pow(2) - 1.0 - q_logvar)
    p_logvar = p.log_variance.clamp(LOGVAR_MIN, LOGVAR_MAX)
    return 0.5 * (
        p_logvar - q_logvar
        + (torch.exp(q_logvar) + (q.mean - p.mean).pow(2)) / torch.exp(p_logvar)
        - 1.0
    )


def gaussian_nll(x: torch.Tensor, p: GaussianParams) -> torch.Tensor:
    logvar = p.log_variance.clamp(LOGVAR_MIN, LOGVAR_MAX)
    return 0.5 * (math.log(2 * math.pi) + logvar + (x - p.mean).pow(2) / torch.exp(logvar))


def sample_posterior(posterior: EnvPosterior, noise: EnvNoise, index: int = 0) -> EnvSample:
    return EnvSample(
        e_s=reparameterize(posterior.static, noise.static[index]),
        e_d=reparameterize(posterior.dynamic, noise.dynamic[index]),
        source=SampleSource.POSTERIOR,
    )


def elbo_loss(
    H: torch.Tensor,
    posterior: EnvPosterior,
    model: EnvironmentSVAE,
    noise: Optional[EnvNoise] = None,
    generator: Optional[torch.Generator] = None,
) -> ELBOTerms:
    """Negative ELBO, computed timestep-wise.

    Reconstruction is the Gaussian NLL of every node vector h_v^t under decode(e_s, e_d^t),
    summed over dimensions, averaged over nodes and summed over t.
    """
    num_timestamps = H.shape[1]
    if posterior.num_timestamps != num_timestamps:
        raise ContractViolation(
            f"posterior covers {posterior.num_timestamps} timestamps, H has {num_timestamps}"
        )
    if noise is None:
        noise = EnvNoise.draw(model.cfg.samples, model.cfg.static_dim, num_timestamps,
                              model.cfg.dynamic_dim, generator=generator, dtype=H.dtype)

    samples = noise.static.shape[0]
    reconstruction = H.new_zeros(())
    kl_dynamic = H.new_zeros(())
    for index in range(samples):
        sample = sample_posterior(posterior, noise, index)
        generated = model.decoder(sample.e_s, sample.e_d)
        nll = gaussian_nll(H, GaussianParams(generated.mean.unsqueeze(0), generated.log_variance.unsqueeze(0)))
        reconstruction = reconstruction + nll.sum(dim=-1).mean(dim=0).sum()
        prior = model.prior_chain(sample.e_d)
        kl_dynamic = kl_dynamic + kl_diag_gaussian(posterior.dynamic, prior).sum()
    reconstruction = reconstruction / samples
    kl_dynamic = kl_dynamic / samples
    kl_static = kl_diag_gaussian(posterior.static).sum()
    total = reconstruction + kl_static + kl_dynamic
    if not torch.isfinite(total):
        raise NumericalError("non-finite ELBO", reconstruction=float(reconstruction),
                             kl_static=float(kl_static), kl_dynamic=float(kl_dynamic))
    return ELBOTerms(total, reconstruction, kl_static, kl_dynamic)


def triplet_margin(d_pos: torch.Tensor, d_neg: torch.Tensor, margin: float) -> torch.Tensor:
    return torch.clamp(d_pos - d_neg + margin, min=0.0)


def _distance(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    # eps keeps the gradient finite when a == b
    return torch.sqrt((a - b).pow(2).sum() + 1e-12)


def triplet_static_loss(
    anchor_H: torch.Tensor,
    positive_H: torch.Tensor,
    negative_H: torch.Tensor,
    margin: float,
    model: EnvironmentSVAE,
) -> torch.Tensor:
    """max(D(e_s, e_s^pos) - D(e_s, e_s^neg) + m, 0) on posterior means of the static factor."""
    anchor = model.encode_static(anchor_H).mean
    positive = model.encode_static(positive_H).mean
    negative = model.encode_static(negative_H).mean
    return triplet_margin(_distance(anchor, positive), _distance(anchor, negative), margin)


def shuffle_time(H: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    perm = torch.randperm(H.shape[1], generator=generator)
    return H[:, perm]


def rotate_blocks(H: torch.Tensor) -> torch.Tensor:
    """Corrupted copy used as the negative sequence when only one graph is available."""
    rolled = torch.roll(H, shifts=max(1, H.shape[2] // 2), dims=2)
    return torch.flip(rolled, dims=[1])


def dynamic_regularization_loss(e_d: torch.Tensor, task: PseudoLabelTask, model: EnvironmentSVAE) -> torch.Tensor:
    """Sum over t of the mean binary cross-entropy between cluster logits and the k-hot target."""
    if task.num_timestamps != e_d.shape[0]:
        raise ContractViolation(f"pseudo labels cover {task.num_timestamps} timestamps, e_d has {e_d.shape[0]}")
    logits = model.cluster_head(e_d)
    target = task.k_hot(dtype=logits.dtype)
    per_step = F.binary_cross_entropy_with_logits(logits, target, reduction="none").mean(dim=-1)
    return per_step.sum()


def combine_esvae_loss(svae: torch.Tensor, static: torch.Tensor, dynamic: torch.Tensor,
                       alpha1: float, alpha2: float) -> ESVAELoss:
    if alpha1 < 0 or alpha2 < 0:
        raise ContractViolation("alpha1 and alpha2 must be non-negative")
    return ESVAELoss(svae + alpha1 * static + alpha2 * dynamic, svae, static, dynamic)


def esvae_loss(
    H: torch.Tensor,
    model: EnvironmentSVAE,
    task: Optional[PseudoLabelTask],
    noise: Optional[EnvNoise] = None,
    positive_H: Optional[torch.Tensor] = None,
    negative_H: Optional[torch.Tensor] = None,
    generator: Optional[torch.Generator] = None,
    alpha1: Optional[float] = None,
    alpha2: Optional[float] = None,
) -> ESVAELoss:
    """L_SVAE + alpha1 * L_s + alpha2 * L_d, with the three components for logging.

    The shared non-sequential variant has no triplet or dynamic regularisation terms.
    """
    cfg = model.cfg
    alpha1 = cfg.alpha1 if alpha1 is None else alpha1
    alpha2 = cfg.alpha2 if alpha2 is None else alpha2
    posterior = model.posterior(H)
    if noise is None:
        noise = EnvNoise.draw(cfg.samples, cfg.static_dim, H.shape[1], cfg.dynamic_dim,
                              generator=generator, dtype=H.dtype)
    svae = elbo_loss(H, posterior, model, noise).total
    zero = H.new_zeros(())
    if not cfg.sequential:
        return combine_esvae_loss(svae, zero, zero, alpha1, alpha2)

    if positive_H is None:
        positive_H = shuffle_time(H, generator)
    if negative_H is None:
        negative_H = rotate_blocks(H)
    static = triplet_static_loss(H, positive_H, negative_H, cfg.margin, model)
    dynamic = zero
    if task is not None:
        e_d = sample_posterior(posterior, noise).e_d
        dynamic = dynamic_regularization_loss(e_d, task, model)
    return combine_esvae_loss(svae, static, dynamic, alpha1, alpha2)

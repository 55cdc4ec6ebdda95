from .generation import GeneratedSamples, sample_generated_library
from .losses import (
    dynamic_regularization_loss,
    elbo_loss,
    esvae_loss,
    kl_diag_gaussian,
    reparameterize,
    triplet_static_loss,
)
from .models import EnvironmentSVAE
from .pseudo_labels import cluster_pseudo_labels, structural_entropy
from .schemas import EnvNoise, EnvPosterior, ESVAEConfig, GaussianParams, PseudoLabelTask

__all__ = [
    "ESVAEConfig",
    "EnvNoise",
    "EnvPosterior",
    "EnvironmentSVAE",
    "GaussianParams",
    "GeneratedSamples",
    "PseudoLabelTask",
    "cluster_pseudo_labels",
    "dynamic_regularization_loss",
    "elbo_loss",
    "esvae_loss",
    "kl_diag_gaussian",
    "reparameterize",
    "sample_generated_library",
    "structural_entropy",
    "triplet_static_loss",
]

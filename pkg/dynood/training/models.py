import threading

import torch
from torch import nn

from ..esvae.models import EnvironmentSVAE
from ..graph_core.schemas import LabelKind
from ..invariance.masks import InvariantMask
from ..shared.exceptions import ContractViolation
from ..st_encoder.models import SpatioTemporalEncoder
from .schemas import TrainConfig

# seeded construction reseeds the global generator inside fork_rng; sweeps build models from threads
_INIT_LOCK = threading.Lock()


class Predictor(nn.Module):
    """Dot-product link scorer over a shared projection, or a linear class head."""

    def __init__(self, kind: LabelKind, rep_dim: int, num_classes: int = 0):
        super().__init__()
        self.kind = LabelKind(kind)
        if self.kind == LabelKind.LINK_OCCURRENCE:
            self.link_projection = nn.Linear(rep_dim, rep_dim)
        else:
            if num_classes < 1:
                raise ContractViolation("node classification needs at least one class")
            self.class_head = nn.Linear(rep_dim, num_classes)

    def link_logits(self, h_u: torch.Tensor, h_v: torch.Tensor) -> torch.Tensor:
        if self.kind != LabelKind.LINK_OCCURRENCE:
            raise ContractViolation("predictor was built for node classification")
        return (self.link_projection(h_u) * self.link_projection(h_v)).sum(dim=-1)

    def class_logits(self, h: torch.Tensor) -> torch.Tensor:
        if self.kind != LabelKind.NODE_CLASS:
            raise ContractViolation("predictor was built for link prediction")
        return self.class_head(h)


class DynoodModel(nn.Module):
    """Encoder, environment VAE, invariant mask and predictor trained jointly."""

    def __init__(self, cfg: TrainConfig, input_dim: int, num_classes: int = 0):
        super().__init__()
        self.cfg = cfg
        self.input_dim = input_dim
        self.num_classes = num_classes
        with _INIT_LOCK:
            self.encoder = SpatioTemporalEncoder(cfg.encoder_config(input_dim))
            self.esvae = EnvironmentSVAE(cfg.esvae_config(), cfg.hidden_dim)
            self.mask = InvariantMask(cfg.hidden_dim, cfg.invariance_config())
            with torch.random.fork_rng():
                torch.manual_seed(cfg.seed + 2)
                self.predictor = Predictor(cfg.task, cfg.hidden_dim, num_classes)

    @property
    def rep_dim(self) -> int:
        return self.cfg.hidden_dim

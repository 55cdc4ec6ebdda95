import torch
import torch.nn.functional as F

from ..graph_core.schemas import LabelKind
from ..shared.exceptions import ConfigurationError, ContractViolation
from .config import LOGIT_CLAMP
from .models import Predictor
from .targets import TaskTargets


def target_logits(H_I: torch.Tensor, targets: TaskTargets, predictor: Predictor) -> torch.Tensor:
    if targets.kind == LabelKind.LINK_OCCURRENCE:
        h_u = H_I[targets.first, targets.rep_index]
        h_v = H_I[targets.second, targets.rep_index]
        return predictor.link_logits(h_u, h_v)
    return predictor.class_logits(H_I[targets.first, targets.rep_index])


def task_loss(H_I: torch.Tensor, targets: TaskTargets, predictor: Predictor) -> torch.Tensor:
    """BCE over positive and negative pairs, or CE over node classes; reads only H_I."""
    if len(targets) == 0:
        raise ConfigurationError("no labels for the requested timestamps")
    if predictor.kind != targets.kind:
        raise ContractViolation(f"predictor kind {predictor.kind.value} does not match labels {targets.kind.value}")
    logits = target_logits(H_I, targets, predictor).clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
    if targets.kind == LabelKind.LINK_OCCURRENCE:
        return F.binary_cross_entropy_with_logits(logits, targets.target.to(logits.dtype))
    return F.cross_entropy(logits, targets.target)


def total_loss(task: torch.Tensor, risk: torch.Tensor, esvae: torch.Tensor, beta1: float, beta2: float) -> torch.Tensor:
    if beta1 < 0 or beta2 < 0:
        raise ContractViolation("beta1 and beta2 must be non-negative")
    return task + beta1 * risk + beta2 * esvae

"""Deterministic forward passes over a trained model."""
import logging
from typing import Sequence

import numpy as np
import torch

from ..evaluation.metrics import accuracy, auc_arrays
from ..graph_core.graph import validate
from ..graph_core.schemas import DynamicGraph, LabelKind
from ..shared.exceptions import ContractViolation, DimensionMismatchError, UndefinedMetricError
from ..st_encoder.encoding import graph_tensors
from .losses import target_logits
from .models import DynoodModel
from .targets import TaskTargets

logger = logging.getLogger(__name__)


def check_compatible(g: DynamicGraph, model: DynoodModel) -> None:
    if g.feature_dim != model.input_dim:
        raise DimensionMismatchError(
            f"dataset has feature dimension {g.feature_dim}, checkpoint expects {model.input_dim}"
        )
    gate_nodes = model.mask.gate.shape[0]
    if gate_nodes and gate_nodes != g.node_count:
        raise DimensionMismatchError(f"dataset has {g.node_count} nodes, checkpoint was trained on {gate_nodes}")


@torch.no_grad()
def invariant_representations(g: DynamicGraph, model: DynoodModel) -> torch.Tensor:
    check_compatible(g, model)
    violations = validate(g, model.num_classes or None)
    if violations:
        raise ContractViolation(f"graph fails validation: {violations[0]}")
    model.eval()
    dtype = next(model.parameters()).dtype
    H = model.encoder(graph_tensors(g, dtype))
    h_i, _, _ = model.mask(H)
    return h_i


@torch.no_grad()
def score_targets(H_I: torch.Tensor, targets: TaskTargets, model: DynoodModel) -> np.ndarray:
    """Probabilities of the positive class (links) or class distributions (nodes)."""
    logits = target_logits(H_I, targets, model.predictor)
    if targets.kind == LabelKind.LINK_OCCURRENCE:
        return torch.sigmoid(logits).cpu().numpy()
    return torch.softmax(logits, dim=-1).cpu().numpy()


def predict(g: DynamicGraph, model: DynoodModel, query: Sequence, timestamp: int | None = None) -> np.ndarray:
    """Scores at ``timestamp`` (default T + 1) for node pairs (links) or nodes (classes)."""
    timestamp = g.num_timestamps + 1 if timestamp is None else timestamp
    query = np.asarray(query, dtype=np.int64)
    if query.size and (query.min() < 0 or query.max() >= g.node_count):
        raise ContractViolation(f"query names a node outside 0..{g.node_count - 1}")
    H_I = invariant_representations(g, model)
    empty = torch.zeros(0, dtype=torch.long)
    if model.predictor.kind == LabelKind.LINK_OCCURRENCE:
        if query.ndim != 2 or query.shape[1] != 2:
            raise ContractViolation("link queries are (u, v) pairs")
        if not 2 <= timestamp <= g.num_timestamps + 1:
            raise ContractViolation(f"link timestamp {timestamp} outside 2..{g.num_timestamps + 1}")
        pairs = torch.as_tensor(query)
        targets = TaskTargets(LabelKind.LINK_OCCURRENCE, torch.full((len(pairs),), timestamp - 2),
                              pairs[:, 0], pairs[:, 1], torch.zeros(len(pairs)), torch.full((len(pairs),), timestamp))
    else:
        nodes = torch.as_tensor(query.reshape(-1))
        index = min(timestamp, g.num_timestamps) - 1
        targets = TaskTargets(LabelKind.NODE_CLASS, torch.full((len(nodes),), index), nodes, empty,
                              torch.zeros(len(nodes), dtype=torch.long), torch.full((len(nodes),), timestamp))
    return score_targets(H_I, targets, model)


def range_metrics(H_I: torch.Tensor, targets: TaskTargets, model: DynoodModel) -> dict:
    """AUC (links) or accuracy (nodes) per target timestamp; undefined timestamps are skipped."""
    results = {}
    for t in targets.timestamps():
        subset = targets.at(t)
        scores = score_targets(H_I, subset, model)
        try:
            if subset.kind == LabelKind.LINK_OCCURRENCE:
                results[t] = auc_arrays(scores, subset.target.numpy())
            else:
                results[t] = accuracy(scores.argmax(axis=1), subset.target.numpy())
        except UndefinedMetricError as exc:
            logger.warning(f"Metric undefined at t={t}: {exc.detail}")
    return results


def mean_metric(per_timestamp: dict) -> float:
    if not per_timestamp:
        raise UndefinedMetricError("no timestamp with a defined metric")
    return float(np.mean(list(per_timestamp.values())))

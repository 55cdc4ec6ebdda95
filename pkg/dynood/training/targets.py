"""Supervision targets per timestamp range.

A link target at timestamp t is scored from representations at t - 1; a node target at t
reads the representations at t (clamped to the last snapshot).
"""
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
import torch

from ..graph_core.graph import link_targets, sample_non_edges
from ..graph_core.schemas import DynamicGraph, LabelKind
from ..shared.exceptions import ConfigurationError


class TaskTargets(NamedTuple):
    kind: LabelKind
    rep_index: torch.Tensor   # 0-based timestamp index into H, per target
    first: torch.Tensor       # node (or first endpoint)
    second: torch.Tensor      # second endpoint; empty for node targets
    target: torch.Tensor      # {0, 1} for links, 0-based class for nodes
    timestamp: torch.Tensor   # 1-based target timestamp

    def __len__(self) -> int:
        return len(self.first)

    def at(self, t: int) -> "TaskTargets":
        keep = self.timestamp == t
        second = self.second[keep] if len(self.second) else self.second
        return TaskTargets(self.kind, self.rep_index[keep], self.first[keep], second,
                           self.target[keep], self.timestamp[keep])

    def timestamps(self):
        return sorted(set(self.timestamp.tolist()))


def _empty(kind: LabelKind) -> TaskTargets:
    empty = torch.zeros(0, dtype=torch.long)
    return TaskTargets(kind, empty, empty, empty, torch.zeros(0), empty)


def link_task_targets(
    g: DynamicGraph,
    span: Tuple[int, int],
    rng: np.random.Generator,
    negative_ratio: int = 1,
    negatives: Optional[Dict[int, np.ndarray]] = None,
) -> TaskTargets:
    """Positives at each target timestamp plus uniform non-edges (or the given ``negatives``)."""
    start, end = span
    if start < 2:
        raise ConfigurationError("link targets start at timestamp 2 (representations of t - 1 are needed)")
    rep, first, second, target, stamps = [], [], [], [], []
    for t in range(start, end + 1):
        positives = link_targets(g, t)
        if negatives is not None and t in negatives:
            sampled = negatives[t]
        else:
            sampled = sample_non_edges(g, t, negative_ratio * len(positives), rng)
        for pairs, label in ((positives, 1.0), (sampled, 0.0)):
            rep.extend([t - 2] * len(pairs))
            first.extend(pairs[:, 0].tolist())
            second.extend(pairs[:, 1].tolist())
            target.extend([label] * len(pairs))
            stamps.extend([t] * len(pairs))
    if not first:
        return _empty(LabelKind.LINK_OCCURRENCE)
    return TaskTargets(
        LabelKind.LINK_OCCURRENCE,
        torch.tensor(rep, dtype=torch.long),
        torch.tensor(first, dtype=torch.long),
        torch.tensor(second, dtype=torch.long),
        torch.tensor(target),
        torch.tensor(stamps, dtype=torch.long),
    )


def node_task_targets(g: DynamicGraph, span: Tuple[int, int]) -> TaskTargets:
    if g.labels is None or g.labels.kind != LabelKind.NODE_CLASS:
        raise ConfigurationError("dataset has no node class labels")
    rep, first, target, stamps = [], [], [], []
    for t in range(span[0], span[1] + 1):
        if t not in g.labels.classes:
            continue
        classes = g.labels.classes[t]
        index = min(t, g.num_timestamps) - 1
        rep.extend([index] * len(classes))
        first.extend(range(len(classes)))
        target.extend((classes - 1).tolist())
        stamps.extend([t] * len(classes))
    if not first:
        return _empty(LabelKind.NODE_CLASS)
    return TaskTargets(
        LabelKind.NODE_CLASS,
        torch.tensor(rep, dtype=torch.long),
        torch.tensor(first, dtype=torch.long),
        torch.zeros(0, dtype=torch.long),
        torch.tensor(target, dtype=torch.long),
        torch.tensor(stamps, dtype=torch.long),
    )


def task_targets(
    g: DynamicGraph,
    kind: LabelKind,
    span: Tuple[int, int],
    rng: Optional[np.random.Generator] = None,
    negative_ratio: int = 1,
    negatives: Optional[Dict[int, np.ndarray]] = None,
) -> TaskTargets:
    if LabelKind(kind) == LabelKind.LINK_OCCURRENCE:
        return link_task_targets(g, span, rng or np.random.default_rng(0), negative_ratio, negatives)
    return node_task_targets(g, span)

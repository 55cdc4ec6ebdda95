"""Scoring trained checkpoints on a dataset's test range."""
import logging
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from ..graph_core.schemas import DynamicGraph, LabelKind
from ..training.inference import invariant_representations, mean_metric, range_metrics
from ..training.models import DynoodModel
from ..training.targets import task_targets
from .negatives import sample_negative_pairs
from .ood import Rule, ood_split_links, parse_rule

logger = logging.getLogger(__name__)


class Evaluation(NamedTuple):
    per_timestamp: Dict[int, float]
    mean: float


def evaluate_checkpoint(
    model: DynoodModel,
    g: DynamicGraph,
    span: Tuple[int, int],
    negatives: Optional[Dict[int, np.ndarray]] = None,
    seed: int = 0,
) -> Evaluation:
    """Metric at every target timestamp of ``span`` and their mean."""
    cfg = model.cfg
    if cfg.task == LabelKind.LINK_OCCURRENCE and negatives is None:
        negatives = sample_negative_pairs(g, span, seed, cfg.negative_ratio)
    targets = task_targets(g, cfg.task, span, np.random.default_rng(seed), cfg.negative_ratio, negatives)
    H_I = invariant_representations(g, model)
    per_timestamp = range_metrics(H_I, targets, model)
    return Evaluation(per_timestamp, mean_metric(per_timestamp))


def evaluate_pair(
    model: DynoodModel,
    g: DynamicGraph,
    span: Tuple[int, int],
    rule: Rule,
    negatives: Optional[Dict[int, np.ndarray]] = None,
    seed: int = 0,
) -> Tuple[Evaluation, Optional[Evaluation]]:
    """(w/o OOD, w/ OOD) evaluations; the second is None when the rule is empty.

    Both views share one set of negatives drawn from the unfiltered graph.
    """
    if model.cfg.task == LabelKind.LINK_OCCURRENCE and negatives is None:
        negatives = sample_negative_pairs(g, span, seed, model.cfg.negative_ratio)
    if not parse_rule(rule):
        return evaluate_checkpoint(model, g, span, negatives, seed), None
    in_view, ood_view = ood_split_links(g, rule)
    return (
        evaluate_checkpoint(model, in_view, span, negatives, seed),
        evaluate_checkpoint(model, ood_view, span, negatives, seed),
    )

"""Spurious features factorised from a cosine-scheduled sample of future links."""
import logging
import math
from typing import Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from ..graph_core.graph import build_snapshot, link_targets
from ..graph_core.schemas import DynamicGraph, LabelKind, LabelSet
from ..graph_core.storage import load
from ..shared.exceptions import ConfigurationError, NumericalError
from .schemas import FeatureShiftSpec, GeneratedDataset

logger = logging.getLogger(__name__)


def sampling_probability(p_bar: float, sigma: float, t: int) -> float:
    return float(np.clip(p_bar + sigma * math.cos(t), 0.0, 1.0))


def sample_future_links(g: DynamicGraph, t: int, probability: float, rng: np.random.Generator) -> np.ndarray:
    """Dense symmetric 0/1 matrix keeping each link of t + 1 with ``probability``."""
    target = np.zeros((g.node_count, g.node_count), dtype=np.float64)
    pairs = link_targets(g, t + 1)
    if len(pairs):
        keep = pairs[rng.random(len(pairs)) < probability]
        target[keep[:, 0], keep[:, 1]] = 1.0
        target[keep[:, 1], keep[:, 0]] = 1.0
    return target


def reconstruction_loss(X: torch.Tensor, target: torch.Tensor, weight_decay: float) -> torch.Tensor:
    """(1/N) [sum over i != j of BCE(sigmoid(x_i . x_j), A_ij) + weight_decay * ||X||^2]."""
    n = X.shape[0]
    logits = X @ X.T
    off_diagonal = ~torch.eye(n, dtype=torch.bool)
    bce = F.binary_cross_entropy_with_logits(logits[off_diagonal], target[off_diagonal], reduction="sum")
    return (bce + weight_decay * X.pow(2).sum()) / n


def factorize_links(
    target: np.ndarray,
    spec: FeatureShiftSpec,
    seed: Tuple[int, ...],
    t: int = 0,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Fit X so that sigmoid(X X^T) reconstructs ``target`` by plain gradient descent.

    Returns (fitted, initial, iterations). Stops once the relative loss change falls below
    ``spec.tolerance`` (after ``spec.min_iterations``) or at ``spec.max_iterations``.
    """
    generator = torch.Generator().manual_seed(int(np.random.SeedSequence(seed).generate_state(1)[0]))
    n = target.shape[0]
    initial = torch.randn(n, spec.feature_dim, generator=generator, dtype=torch.float64) * spec.init_std
    X = initial.clone().requires_grad_(True)
    A = torch.as_tensor(target, dtype=torch.float64)
    previous = None
    iteration = 0
    for iteration in range(1, spec.max_iterations + 1):
        loss = reconstruction_loss(X, A, spec.weight_decay)
        if not torch.isfinite(loss):
            raise NumericalError("feature factorisation diverged", timestamp=t, iteration=iteration)
        (grad,) = torch.autograd.grad(loss, X)
        with torch.no_grad():
            X -= spec.learning_rate * grad
        value = float(loss)
        if previous is not None and iteration > spec.min_iterations:
            if abs(previous - value) / max(abs(previous), 1e-12) < spec.tolerance:
                break
        previous = value
    fitted = X.detach()
    if not torch.isfinite(fitted).all():
        raise NumericalError("feature factorisation diverged", timestamp=t, iteration=iteration)
    return fitted.numpy(), initial.numpy(), iteration


def gen_feature_shift(spec: FeatureShiftSpec, base: Optional[DynamicGraph] = None) -> GeneratedDataset:
    """Append factorised shifted features to every snapshot; the structure is untouched.

    Without T + 1 link labels on the base graph, its last snapshot becomes the label block.
    """
    if base is None:
        if not spec.base_dataset:
            raise ConfigurationError("feature shift needs base_dataset or a base graph")
        base = load(spec.base_dataset)
    has_future = base.labels is not None and base.labels.kind == LabelKind.LINK_OCCURRENCE
    if not has_future:
        if base.num_timestamps < 2:
            raise ConfigurationError("base graph needs at least two snapshots")
        last = base.snapshots[-1]
        links = tuple((u, v, base.num_timestamps) for u, v in last.edges())
        link_tags = {(u, v, base.num_timestamps): tag for (u, v), tag in last.edge_tags.items()}
        base = DynamicGraph(
            snapshots=base.snapshots[:-1], node_count=base.node_count,
            labels=LabelSet(kind=LabelKind.LINK_OCCURRENCE, links=links, link_tags=link_tags),
        )

    snapshots = []
    iterations = []
    for snap in base.snapshots:
        t = snap.timestamp
        probability = sampling_probability(spec.p_bar, spec.sigma, t)
        target = sample_future_links(base, t, probability, np.random.default_rng([spec.seed, 0, t]))
        fitted, _, used = factorize_links(target, spec, (spec.seed, 1, t), t)
        iterations.append(used)
        features = np.concatenate([snap.features, fitted], axis=1)
        snapshots.append(build_snapshot(base.node_count, snap.edges(), features, t, snap.edge_tags))
        logger.debug(f"t={t}: p(t)={probability:.3f}, {int(target.sum()) // 2} sampled links, {used} iterations")

    graph = DynamicGraph(snapshots=tuple(snapshots), node_count=base.node_count, labels=base.labels)
    targets = graph.num_timestamps + 1
    logger.info(f"Feature-shift dataset: N={graph.node_count}, T={graph.num_timestamps}, d={graph.feature_dim}")
    return GeneratedDataset(
        graph=graph, splits=default_link_splits(targets), task=LabelKind.LINK_OCCURRENCE.value,
        extras={"iterations": iterations},
    )


def default_link_splits(last_target: int) -> dict:
    """Target timestamps 2..last split roughly 60/20/20, each range non-empty."""
    count = last_target - 1
    if count < 3:
        raise ConfigurationError(f"need at least three link target timestamps, got {count}")
    train = max(1, int(round(0.6 * count)))
    val = max(1, int(round(0.2 * count)))
    if train + val >= count:
        train = count - val - 1
    return {
        "train": (2, 1 + train),
        "val": (2 + train, 1 + train + val),
        "test": (2 + train + val, last_target),
    }

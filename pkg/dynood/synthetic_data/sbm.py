"""Stochastic block model with an invariant and a shift-controlled variant link factor."""
import logging
from typing import Dict, Tuple

import numpy as np

from ..graph_core.graph import build_snapshot
from ..graph_core.schemas import DynamicGraph, LabelKind, LabelSet
from .schemas import GeneratedDataset, SbmSpec

logger = logging.getLogger(__name__)

INVARIANT_TAG = "inv"
VARIANT_TAG = "var"


def balanced_labels(num_nodes: int, blocks: int, rng: np.random.Generator) -> np.ndarray:
    """Round-robin class ids 0..C-1, shuffled; class sizes differ by at most one."""
    return rng.permutation(np.arange(num_nodes) % blocks)


def variant_probability(spec: SbmSpec, same_label: bool, shift_level: float) -> float:
    """p_var: label-matched pairs move linearly from p_inter (level 0) to p_intra (level 1)."""
    if same_label:
        return spec.p_inter + shift_level * (spec.p_intra - spec.p_inter)
    return spec.p_inter


def expected_block_density(spec: SbmSpec, same_label: bool, shift_level: float | None = None) -> float:
    """Expected edge probability of a label-matched (or mismatched) pair."""
    shift_level = spec.shift_level if shift_level is None else shift_level
    w_inv = spec.invariant_weight
    p_corr = spec.p_intra if same_label else spec.p_inter
    p_var = variant_probability(spec, same_label, shift_level)
    return float(np.clip(w_inv * p_corr + (1.0 - w_inv) * p_var, 0.0, 1.0))


def _split_of(t: int, splits: Dict[str, Tuple[int, int]]) -> str:
    for name, (start, end) in splits.items():
        if start <= t <= end:
            return name
    return "train"


def gen_sbm_node_cls(spec: SbmSpec) -> GeneratedDataset:
    rng = np.random.default_rng([spec.seed, 0])
    n, blocks = spec.num_nodes, spec.blocks
    labels = balanced_labels(n, blocks, rng)
    splits = {"train": spec.train_range, "val": spec.val_range, "test": spec.test_range}
    # train and val keep the spurious correlation; the test split is drawn at shift level 0
    levels = {"train": spec.shift_level, "val": spec.shift_level, "test": 0.0}

    same_label = labels[:, None] == labels[None, :]
    invariant_part = spec.invariant_weight * np.where(same_label, spec.p_intra, spec.p_inter)
    variant_parts = {
        name: (1.0 - spec.invariant_weight) * np.where(
            same_label, variant_probability(spec, True, level), variant_probability(spec, False, level)
        )
        for name, level in levels.items()
    }
    rows, cols = np.triu_indices(n, k=1)

    snapshots = []
    clipped = 0
    for t in range(1, spec.num_timestamps + 1):
        raw = invariant_part + variant_parts[_split_of(t, splits)]
        clipped += int(((raw[rows, cols] < 0) | (raw[rows, cols] > 1)).sum())
        probability = np.clip(raw, 0.0, 1.0)
        draw = np.random.default_rng([spec.seed, 1, t]).random(len(rows))
        chosen = draw < probability[rows, cols]
        edges = list(zip(rows[chosen].tolist(), cols[chosen].tolist()))
        tags = {
            (u, v): INVARIANT_TAG if u_draw < invariant_part[u, v] else VARIANT_TAG
            for (u, v), u_draw in zip(edges, draw[chosen].tolist())
        }
        features = np.random.default_rng([spec.seed, 2, t]).standard_normal((n, spec.feature_dim))
        snapshots.append(build_snapshot(n, edges, features, t, tags))

    if clipped:
        logger.warning(f"{clipped} edge probabilities fell outside [0, 1] and were clipped")
    classes = {t: labels + 1 for t in range(1, spec.num_timestamps + 1)}
    graph = DynamicGraph(
        snapshots=tuple(snapshots),
        node_count=n,
        labels=LabelSet(kind=LabelKind.NODE_CLASS, classes=classes),
    )
    logger.info(f"SBM dataset: N={n}, T={spec.num_timestamps}, shift_level={spec.shift_level}")
    return GeneratedDataset(
        graph=graph, splits=splits, clipped=clipped, task=LabelKind.NODE_CLASS.value,
        extras={"shift_levels": levels},
    )

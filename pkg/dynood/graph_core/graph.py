"""Validation, degree/volume utilities and builders for dynamic graphs."""
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..shared.exceptions import ContractViolation, GraphIndexError
from .schemas import DynamicGraph, LabelKind, LabelSet, Snapshot, Violation

logger = logging.getLogger(__name__)


def build_snapshot(
    num_nodes: int,
    edges: Iterable[Tuple[int, int]],
    features: np.ndarray,
    timestamp: int,
    edge_tags: Optional[Dict[Tuple[int, int], str]] = None,
) -> Snapshot:
    """Build a snapshot from an undirected edge list; self-loops are dropped."""
    adjacency = np.zeros((num_nodes, num_nodes), dtype=np.int64)
    tags: Dict[Tuple[int, int], str] = {}
    for u, v in edges:
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise GraphIndexError(f"edge ({u},{v}) at t={timestamp} references a node outside 0..{num_nodes - 1}")
        if u == v:
            continue
        adjacency[u, v] = adjacency[v, u] = 1
        key = (min(u, v), max(u, v))
        if edge_tags and key in edge_tags:
            tags[key] = edge_tags[key]
        elif edge_tags and (u, v) in edge_tags:
            tags[key] = edge_tags[(u, v)]
    return Snapshot(adjacency=adjacency, features=features, timestamp=timestamp, edge_tags=tags)


def validate(g: DynamicGraph, num_classes: Optional[int] = None) -> List[Violation]:
    """Return every broken invariant; an empty list means the graph is well formed.

    ``num_classes`` bounds class labels to 1..C, e.g. the C of a trained classifier.
    """
    violations: List[Violation] = []
    n = g.node_count
    for index, snap in enumerate(g.snapshots, start=1):
        t = snap.timestamp
        if t != index:
            violations.append(Violation(
                invariant="consecutive_timestamps", timestamp=t,
                message=f"snapshot {index} carries timestamp {t}, expected {index}",
            ))
        a = snap.adjacency
        if a.shape != (n, n):
            violations.append(Violation(
                invariant="shared_node_universe", timestamp=t,
                message=f"adjacency at t={t} has shape {a.shape}, expected ({n}, {n})",
            ))
            continue
        if snap.features.shape[0] != n:
            violations.append(Violation(
                invariant="feature_rows", timestamp=t,
                message=f"dimension mismatch at t={t}: {snap.features.shape[0]} feature rows for {n} nodes",
            ))
        if snap.features.shape[1] != g.feature_dim:
            violations.append(Violation(
                invariant="feature_dim", timestamp=t,
                message=f"feature dimension {snap.features.shape[1]} at t={t} differs from {g.feature_dim}",
            ))
        bad_rows, bad_cols = np.nonzero((a != 0) & (a != 1))
        for u, v in zip(bad_rows, bad_cols):
            violations.append(Violation(
                invariant="binary_adjacency", timestamp=t, pair=(int(u), int(v)),
                message=f"non-binary entry {a[u, v]} at t={t}, pair ({u},{v})",
            ))
        for v in np.nonzero(np.diag(a))[0]:
            violations.append(Violation(
                invariant="zero_diagonal", timestamp=t, node=int(v),
                message=f"self-loop at t={t}, node {v}",
            ))
        rows, cols = np.nonzero(np.triu(a != a.T, k=1))
        for u, v in zip(rows, cols):
            violations.append(Violation(
                invariant="symmetry", timestamp=t, pair=(int(u), int(v)),
                message=f"asymmetry at t={t}, pair ({u},{v})",
            ))
        if not np.all(np.isfinite(snap.features)):
            violations.append(Violation(
                invariant="finite_features", timestamp=t,
                message=f"non-finite features at t={t}",
            ))
    if g.labels is not None:
        violations.extend(_validate_labels(g.labels, n, g.num_timestamps, num_classes))
    return violations


def _validate_labels(
    labels: LabelSet, n: int, num_timestamps: int, num_classes: Optional[int] = None
) -> List[Violation]:
    violations: List[Violation] = []
    for u, v, t in labels.links:
        if not (0 <= u < n and 0 <= v < n):
            violations.append(Violation(
                invariant="link_label_nodes", timestamp=t, pair=(u, v),
                message=f"link label ({u},{v},{t}) references a node outside 0..{n - 1}",
            ))
        if not 1 <= t <= num_timestamps + 1:
            violations.append(Violation(
                invariant="link_label_timestamp", timestamp=t, pair=(u, v),
                message=f"link label ({u},{v},{t}) has timestamp outside 1..{num_timestamps + 1}",
            ))
    for t, vector in labels.classes.items():
        if vector.shape != (n,):
            violations.append(Violation(
                invariant="class_label_rows", timestamp=t,
                message=f"class labels at t={t} have shape {vector.shape}, expected ({n},)",
            ))
            continue
        for v in np.nonzero(vector < 1)[0]:
            violations.append(Violation(
                invariant="class_label_range", timestamp=t, node=int(v),
                message=f"class label {vector[v]} at t={t}, node {v} is below 1",
            ))
        if num_classes is not None:
            for v in np.nonzero(vector > num_classes)[0]:
                violations.append(Violation(
                    invariant="class_label_range", timestamp=t, node=int(v),
                    message=f"class label {vector[v]} at t={t}, node {v} is above C={num_classes}",
                ))
        if not 1 <= t <= num_timestamps + 1:
            violations.append(Violation(
                invariant="class_label_timestamp", timestamp=t,
                message=f"class labels at t={t} outside 1..{num_timestamps + 1}",
            ))
    return violations


def _check_node(g: DynamicGraph, v: int) -> None:
    if not 0 <= v < g.node_count:
        raise GraphIndexError(f"node {v} outside 0..{g.node_count - 1}")


def degree(g: DynamicGraph, v: int, t: int) -> int:
    _check_node(g, v)
    return int(g.snapshot(t).adjacency[v].sum())


def degrees(snapshot: Snapshot) -> np.ndarray:
    return snapshot.adjacency.sum(axis=1)


def volume(g: DynamicGraph, t: int) -> int:
    return int(g.snapshot(t).adjacency.sum())


def prefix(g: DynamicGraph, t: int) -> DynamicGraph:
    """The first ``t`` snapshots; labels are kept as they are."""
    if not 1 <= t <= g.num_timestamps:
        raise GraphIndexError(f"prefix length {t} outside 1..{g.num_timestamps}")
    return DynamicGraph(snapshots=g.snapshots[:t], node_count=g.node_count, labels=g.labels)


def permute(g: DynamicGraph, perm: Sequence[int]) -> DynamicGraph:
    """Relabel nodes so that old node ``perm[i]`` becomes new node ``i``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.node_count)):
        raise ContractViolation("perm must be a permutation of the node indices")
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm))
    snapshots = []
    for snap in g.snapshots:
        tags = {}
        for (u, v), tag in snap.edge_tags.items():
            a, b = int(inverse[u]), int(inverse[v])
            tags[(min(a, b), max(a, b))] = tag
        snapshots.append(Snapshot(
            adjacency=snap.adjacency[np.ix_(perm, perm)],
            features=snap.features[perm],
            timestamp=snap.timestamp,
            edge_tags=tags,
        ))
    labels = None
    if g.labels is not None:
        links = tuple((int(inverse[u]), int(inverse[v]), t) for u, v, t in g.labels.links)
        classes = {t: vector[perm] for t, vector in g.labels.classes.items()}
        link_tags = {}
        for (u, v, t), tag in g.labels.link_tags.items():
            a, b = int(inverse[u]), int(inverse[v])
            link_tags[(min(a, b), max(a, b), t)] = tag
        labels = LabelSet(kind=g.labels.kind, links=links, classes=classes, link_tags=link_tags)
    return DynamicGraph(snapshots=tuple(snapshots), node_count=g.node_count, labels=labels)


def link_targets(g: DynamicGraph, t: int) -> np.ndarray:
    """Positive pairs (k x 2, u < v) to predict at target timestamp ``t``.

    Targets up to T come from the snapshots themselves; ``T + 1`` reads the label block.
    """
    if 1 <= t <= g.num_timestamps:
        return np.asarray(g.snapshot(t).edges(), dtype=np.int64).reshape(-1, 2)
    if t == g.num_timestamps + 1:
        if g.labels is None or g.labels.kind != LabelKind.LINK_OCCURRENCE:
            raise ContractViolation(f"no link labels for timestamp {t}")
        pairs = sorted({(min(u, v), max(u, v)) for u, v, lt in g.labels.links if lt == t and u != v})
        return np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    raise GraphIndexError(f"link target timestamp {t} outside 1..{g.num_timestamps + 1}")


def future_adjacency(g: DynamicGraph, t: int) -> np.ndarray:
    """Dense adjacency of the targets at ``t`` (used to exclude positives when sampling negatives)."""
    adjacency = np.zeros((g.node_count, g.node_count), dtype=bool)
    pairs = link_targets(g, t)
    if len(pairs):
        adjacency[pairs[:, 0], pairs[:, 1]] = True
        adjacency[pairs[:, 1], pairs[:, 0]] = True
    return adjacency


def edge_count(g: DynamicGraph) -> int:
    return sum(int(np.triu(s.adjacency, k=1).sum()) for s in g.snapshots)


def sample_non_edges(g: DynamicGraph, t: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct uniform pairs (u < v) that are not targets at ``t``; never self-pairs."""
    n = g.node_count
    blocked = future_adjacency(g, t)
    available = n * (n - 1) // 2 - int(np.triu(blocked, k=1).sum())
    if count <= 0 or available <= 0:
        return np.zeros((0, 2), dtype=np.int64)
    if count >= available // 2:
        rows, cols = np.triu_indices(n, k=1)
        keep = ~blocked[rows, cols]
        pool = np.stack([rows[keep], cols[keep]], axis=1).astype(np.int64)
        chosen = rng.permutation(len(pool))[: min(count, available)]
        return pool[np.sort(chosen)]
    seen = set()
    pairs = []
    while len(pairs) < count:
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v:
            continue
        key = (min(u, v), max(u, v))
        if blocked[key] or key in seen:
            continue
        seen.add(key)
        pairs.append(key)
    return np.asarray(pairs, dtype=np.int64)

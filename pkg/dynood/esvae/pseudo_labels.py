"""Structural-entropy pseudo labels for the dynamic factor."""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from sklearn.cluster import KMeans

from ..graph_core.graph import degrees
from ..graph_core.schemas import DynamicGraph, Snapshot
from ..shared.exceptions import ConfigurationError, DomainError
from .config import DEFAULT_CLUSTERS, DEFAULT_TOP_K, KMEANS_RESTARTS
from .schemas import PseudoLabelTask

logger = logging.getLogger(__name__)


def structural_entropy(snapshot: Snapshot) -> np.ndarray:
    """Per-node summands of the 1-order structural entropy (bits); isolated nodes give 0."""
    deg = degrees(snapshot).astype(np.float64)
    vol = deg.sum()
    if vol <= 0:
        raise DomainError(f"structural entropy undefined for the empty graph at t={snapshot.timestamp}")
    p = deg / vol
    summands = np.zeros_like(p)
    active = p > 0
    summands[active] = -p[active] * np.log2(p[active])
    return summands


def cluster_pseudo_labels(
    g: DynamicGraph,
    H: np.ndarray,
    m: int = DEFAULT_CLUSTERS,
    k: int = DEFAULT_TOP_K,
    seed: int = 0,
    restarts: int = KMEANS_RESTARTS,
) -> PseudoLabelTask:
    """Cluster time-averaged representations, then rank clusters by mean uncertainty per t.

    ``H`` is N x T' with T' <= T; only the first T' snapshots are used. Ties in the top-k
    ranking go to the lower cluster index.
    """
    H = np.asarray(H, dtype=np.float64)
    n, num_timestamps = H.shape[0], H.shape[1]
    if n < m:
        raise ConfigurationError(f"need at least m={m} nodes for clustering, got {n}")
    if not 1 <= k <= m:
        raise ConfigurationError(f"top-k must be in 1..{m}, got {k}")
    averaged = H.mean(axis=1)
    kmeans = KMeans(n_clusters=m, n_init=restarts, random_state=seed)
    assignment = kmeans.fit_predict(averaged).astype(np.int64)

    uncertainty = np.zeros((num_timestamps, m), dtype=np.float64)
    targets = []
    for t in range(num_timestamps):
        try:
            summands = structural_entropy(g.snapshots[t])
        except DomainError:
            logger.warning(f"Empty snapshot at t={t + 1}; cluster uncertainties set to 0")
            summands = np.zeros(n)
        for cluster in range(m):
            members = assignment == cluster
            if members.any():
                uncertainty[t, cluster] = summands[members].mean()
        ranked = sorted(range(m), key=lambda c: (-uncertainty[t, c], c))
        targets.append(tuple(sorted(ranked[:k])))
    return PseudoLabelTask(
        cluster_assignment=assignment,
        targets=tuple(targets),
        cluster_uncertainty=uncertainty,
        clusters=m,
        top_k=k,
    )


def export_assignments(task: PseudoLabelTask, path: str | Path, header: Optional[str] = "v cluster") -> None:
    """Text table ``v cluster`` with 1-based cluster ids."""
    lines = [header] if header else []
    lines.extend(f"{v} {int(c) + 1}" for v, c in enumerate(task.cluster_assignment))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Feature-similarity graphs under controlled invariant and dynamic environments."""
import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from ..graph_core.graph import build_snapshot
from ..graph_core.schemas import DynamicGraph, LabelKind, LabelSet
from ..shared.exceptions import DomainError
from .feature_shift import default_link_splits
from .schemas import EnvMode, EnvSuiteSpec, GeneratedDataset

logger = logging.getLogger(__name__)

MIXED_TAG = "mixed"
SIMILARITY_TAG = "sim"


def factor_tag(k: int) -> str:
    return f"K{k + 1}"


def similarity_edges(features: np.ndarray, target_degree: float) -> List[Tuple[int, int]]:
    """The round(target_degree * N / 2) most cosine-similar pairs."""
    n = features.shape[0]
    norms = np.linalg.norm(features, axis=1)
    if np.any(norms == 0):
        raise DomainError("zero feature vector; cosine similarity undefined")
    unit = features / norms[:, None]
    rows, cols = np.triu_indices(n, k=1)
    similarity = (unit @ unit.T)[rows, cols]
    count = min(len(rows), int(round(target_degree * n / 2)))
    if count == 0:
        raise DomainError(f"target degree {target_degree} selects no edges for N={n}")
    chosen = np.argsort(-similarity, kind="stable")[:count]
    chosen.sort()
    return list(zip(rows[chosen].tolist(), cols[chosen].tolist()))


def dynamic_amplitude(spec: EnvSuiteSpec, t: int) -> float:
    """sin(4T) with T the period; sin(4t) when ``per_step_sin`` is set."""
    return math.sin(4 * (t if spec.per_step_sin else spec.num_timestamps))


def _stationary_features(spec: EnvSuiteSpec, rng: np.random.Generator):
    n, d = spec.num_nodes, spec.feature_dim
    means = rng.normal(spec.mu_sta, spec.sigma_sta, size=(spec.factors, d))
    assignment = rng.permutation(np.arange(n) % spec.factors)
    environments = spec.num_timestamps + 1
    low_count = int(round(spec.gamma_inv * environments))
    low = set((rng.permutation(environments)[:low_count] + 1).tolist())
    features, noise_levels = {}, {}
    for t in range(1, environments + 1):
        amplitude = spec.low_noise if t in low else spec.high_noise
        noise = np.random.default_rng([spec.seed, 3, t]).uniform(-amplitude, amplitude, size=(n, d))
        features[t] = means[assignment] + noise
        noise_levels[t] = amplitude
    return features, assignment, {"factor_means": means, "assignment": assignment, "noise_levels": noise_levels}


def _nonstationary_features(spec: EnvSuiteSpec, rng: np.random.Generator):
    n, d = spec.num_nodes, spec.feature_dim
    static = rng.normal(spec.mu_sta, spec.sigma_sta, size=(n, d))
    features, amplitudes = {}, {}
    for t in range(1, spec.num_timestamps + 2):
        dynamic = np.random.default_rng([spec.seed, 4, t]).normal(spec.mu_dyn, spec.sigma_dyn, size=(n, d))
        amplitudes[t] = dynamic_amplitude(spec, t)
        features[t] = (1.0 - spec.gamma_dyn) * static + spec.gamma_dyn * amplitudes[t] * dynamic
    return features, None, {"static": static, "amplitudes": amplitudes}


def gen_env_suite(spec: EnvSuiteSpec) -> GeneratedDataset:
    """T snapshots plus T + 1 link labels; stationary suites withhold ``spec.ood_tag`` links."""
    rng = np.random.default_rng([spec.seed, 0])
    if spec.mode == EnvMode.STATIONARY:
        features, assignment, extras = _stationary_features(spec, rng)
    else:
        features, assignment, extras = _nonstationary_features(spec, rng)

    def tag_of(u: int, v: int) -> str:
        if assignment is None:
            return SIMILARITY_TAG
        return factor_tag(int(assignment[u])) if assignment[u] == assignment[v] else MIXED_TAG

    snapshots = []
    future: Dict[Tuple[int, int], str] = {}
    for t in range(1, spec.num_timestamps + 2):
        edges = similarity_edges(features[t], spec.target_degree)
        tags = {(u, v): tag_of(u, v) for u, v in edges}
        if t <= spec.num_timestamps:
            snapshots.append(build_snapshot(spec.num_nodes, edges, features[t], t, tags))
        else:
            future = tags

    label_t = spec.num_timestamps + 1
    labels = LabelSet(
        kind=LabelKind.LINK_OCCURRENCE,
        links=tuple((u, v, label_t) for u, v in sorted(future)),
        link_tags={(u, v, label_t): tag for (u, v), tag in future.items()},
    )
    graph = DynamicGraph(snapshots=tuple(snapshots), node_count=spec.num_nodes, labels=labels)
    ood_rule = spec.ood_tag if spec.mode == EnvMode.STATIONARY else ""
    logger.info(
        f"Env suite ({spec.mode.value}): N={spec.num_nodes}, T={spec.num_timestamps}, "
        f"gamma_inv={spec.gamma_inv}, gamma_dyn={spec.gamma_dyn}"
    )
    return GeneratedDataset(
        graph=graph, splits=default_link_splits(label_t), ood_rule=ood_rule,
        task=LabelKind.LINK_OCCURRENCE.value, extras=extras,
    )

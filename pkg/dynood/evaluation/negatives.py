from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from ..graph_core.graph import link_targets, sample_non_edges
from ..graph_core.schemas import DynamicGraph
from ..shared.tensor_store import load_tensors, save_tensors


def sample_negative_pairs(g: DynamicGraph, span: Tuple[int, int], seed: int, ratio: int = 1) -> Dict[int, np.ndarray]:
    """Uniform non-edges per target timestamp, as many as positives times ``ratio``."""
    negatives = {}
    for t in range(span[0], span[1] + 1):
        rng = np.random.default_rng([seed, t])
        negatives[t] = sample_non_edges(g, t, ratio * len(link_targets(g, t)), rng)
    return negatives


def save_negatives(negatives: Dict[int, np.ndarray], path: str | Path, seed: int) -> None:
    save_tensors(path, {f"neg/t{t}": pairs for t, pairs in negatives.items()}, {"seed": seed})


def load_negatives(path: str | Path) -> Dict[int, np.ndarray]:
    tensors, _ = load_tensors(path)
    return {int(name.split("/t", 1)[1]): np.array(value) for name, value in tensors.items() if name.startswith("neg/t")}

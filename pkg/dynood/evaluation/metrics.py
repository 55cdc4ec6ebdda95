from typing import Iterable, Sequence, Tuple

import numpy as np
from sklearn.metrics import roc_auc_score

from ..shared.exceptions import ContractViolation, UndefinedMetricError


def auc(scores: Iterable[Tuple[float, int]]) -> float:
    """Rank AUC of (score, label) pairs; ties count one half."""
    pairs = list(scores)
    if not pairs:
        raise UndefinedMetricError("AUC of an empty score list")
    values = np.asarray([float(s) for s, _ in pairs], dtype=np.float64)
    labels = np.asarray([int(y) for _, y in pairs], dtype=np.int64)
    return auc_arrays(values, labels)


def auc_arrays(scores: np.ndarray, labels: np.ndarray) -> float:
    labels = np.asarray(labels).astype(np.int64)
    if set(np.unique(labels).tolist()) != {0, 1}:
        raise UndefinedMetricError("AUC needs both a positive and a negative example")
    return float(roc_auc_score(labels, np.asarray(scores, dtype=np.float64)))


def accuracy(predictions: Sequence[int], labels: Sequence[int]) -> float:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ContractViolation(f"{len(predictions)} predictions for {len(labels)} labels")
    if labels.size == 0:
        raise UndefinedMetricError("accuracy of an empty prediction list")
    return float((predictions == labels).mean())

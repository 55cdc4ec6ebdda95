"""Functional entry points over the encoder modules."""
from typing import List

import numpy as np
import torch

from ..graph_core.graph import validate
from ..graph_core.schemas import DynamicGraph, Snapshot
from ..shared.exceptions import ContractViolation, DimensionMismatchError
from .models import FeatureProjection, SnapshotTensors, SpatialAttentionLayer, SpatioTemporalEncoder
from .models import temporal_aggregate as _temporal_aggregate
from .schemas import NodeRepresentationSequence


def snapshot_tensors(snapshot: Snapshot, dtype=torch.float32) -> SnapshotTensors:
    return SnapshotTensors(
        features=torch.as_tensor(np.asarray(snapshot.features), dtype=dtype),
        edge_index=torch.as_tensor(snapshot.edge_index(), dtype=torch.long),
    )


def graph_tensors(g: DynamicGraph, dtype=torch.float32) -> List[SnapshotTensors]:
    return [snapshot_tensors(snap, dtype) for snap in g.snapshots]


def project_features(x: torch.Tensor, t: int, projection: FeatureProjection) -> torch.Tensor:
    if t < 1:
        raise ContractViolation(f"timestamp must be >= 1, got {t}")
    return projection(x, t)


def spatial_attention_layer(z: torch.Tensor, snapshot: Snapshot, layer: SpatialAttentionLayer) -> torch.Tensor:
    if z.shape[0] != snapshot.num_nodes:
        raise DimensionMismatchError(f"{z.shape[0]} rows for a {snapshot.num_nodes}-node snapshot")
    return layer(z, snapshot_tensors(snapshot).edge_index)


def temporal_aggregate(z_hat, produced_by: str = "") -> NodeRepresentationSequence:
    """Accepts an N x T x d' tensor or a list of T matrices of shape N x d'."""
    if isinstance(z_hat, (list, tuple)):
        shapes = {tuple(m.shape) for m in z_hat}
        if len(shapes) != 1:
            raise DimensionMismatchError(f"per-timestamp matrices disagree in shape: {sorted(shapes)}")
        z_hat = torch.stack(list(z_hat), dim=1)
    return NodeRepresentationSequence(values=_temporal_aggregate(z_hat), produced_by=produced_by)


def encode(g: DynamicGraph, encoder: SpatioTemporalEncoder) -> NodeRepresentationSequence:
    violations = validate(g)
    if violations:
        raise ContractViolation(f"graph fails validation: {violations[0]}")
    dtype = next(encoder.parameters()).dtype
    values = encoder(graph_tensors(g, dtype))
    return NodeRepresentationSequence(values=values, produced_by=encoder.cfg.fingerprint())

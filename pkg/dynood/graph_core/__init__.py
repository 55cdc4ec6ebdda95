from .graph import degree, link_targets, permute, prefix, sample_non_edges, validate, volume
from .schemas import DynamicGraph, LabelKind, LabelSet, Snapshot, Violation

__all__ = [
    "DynamicGraph",
    "LabelKind",
    "LabelSet",
    "Snapshot",
    "Violation",
    "degree",
    "link_targets",
    "permute",
    "prefix",
    "sample_non_edges",
    "validate",
    "volume",
]

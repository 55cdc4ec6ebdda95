from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..shared.exceptions import GraphIndexError


class LabelKind(str, Enum):
    LINK_OCCURRENCE = "link_occurrence"
    NODE_CLASS = "node_class"


def _frozen_array(value, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class Snapshot(BaseModel):
    """One graph at one timestamp. Invariants are checked by ``validate``, not here."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    adjacency: np.ndarray = Field(..., description="N x N binary symmetric adjacency, zero diagonal")
    features: np.ndarray = Field(..., description="N x d node features")
    timestamp: int = Field(..., ge=1, description="1-based snapshot index")
    edge_tags: Dict[Tuple[int, int], str] = Field(default_factory=dict, description="Provenance per edge (u < v)")

    @field_validator("adjacency", mode="before")
    @classmethod
    def _copy_adjacency(cls, value):
        array = _frozen_array(value, np.int64)
        if array.ndim != 2:
            raise ValueError("adjacency must be a 2-d matrix")
        return array

    @field_validator("features", mode="before")
    @classmethod
    def _copy_features(cls, value):
        array = _frozen_array(value, np.float64)
        if array.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        return array

    @property
    def num_nodes(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> List[Tuple[int, int]]:
        """Undirected edges as sorted ``(u, v)`` pairs with ``u < v``."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        return [(int(u), int(v)) for u, v in zip(rows, cols)]

    def edge_index(self) -> np.ndarray:
        """2 x 2|E| array of (source, destination) covering both directions."""
        rows, cols = np.nonzero(self.adjacency)
        return np.stack([cols, rows]).astype(np.int64)

    def equals(self, other: "Snapshot") -> bool:
        return (
            self.timestamp == other.timestamp
            and np.array_equal(self.adjacency, other.adjacency)
            and np.array_equal(self.features, other.features)
            and self.edge_tags == other.edge_tags
        )


class LabelSet(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: LabelKind
    links: Tuple[Tuple[int, int, int], ...] = Field(default=(), description="Positive (u, v, t) edges")
    classes: Dict[int, np.ndarray] = Field(default_factory=dict, description="timestamp -> class id per node, 1..C")
    link_tags: Dict[Tuple[int, int, int], str] = Field(default_factory=dict, description="Provenance of label links, keyed (u, v, t) with u < v")

    @field_validator("classes", mode="before")
    @classmethod
    def _copy_classes(cls, value):
        return {int(t): _frozen_array(vector, np.int64) for t, vector in dict(value).items()}

    @property
    def num_classes(self) -> int:
        if not self.classes:
            return 0
        return int(max(vector.max(initial=0) for vector in self.classes.values()))

    def equals(self, other: Optional["LabelSet"]) -> bool:
        if other is None:
            return False
        return (
            self.kind == other.kind
            and sorted(self.links) == sorted(other.links)
            and sorted(self.classes) == sorted(other.classes)
            and all(np.array_equal(self.classes[t], other.classes[t]) for t in self.classes)
            and self.link_tags == other.link_tags
        )


class DynamicGraph(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    snapshots: Tuple[Snapshot, ...]
    node_count: int = Field(..., ge=1)
    labels: Optional[LabelSet] = None

    @property
    def num_timestamps(self) -> int:
        return len(self.snapshots)

    @property
    def feature_dim(self) -> int:
        return self.snapshots[0].features.shape[1] if self.snapshots else 0

    def snapshot(self, t: int) -> Snapshot:
        if not 1 <= t <= self.num_timestamps:
            raise GraphIndexError(f"timestamp {t} outside 1..{self.num_timestamps}")
        return self.snapshots[t - 1]

    def equals(self, other: "DynamicGraph") -> bool:
        if self.node_count != other.node_count or self.num_timestamps != other.num_timestamps:
            return False
        if not all(a.equals(b) for a, b in zip(self.snapshots, other.snapshots)):
            return False
        if self.labels is None or other.labels is None:
            return self.labels is None and other.labels is None
        return self.labels.equals(other.labels)


class Violation(BaseModel):
    invariant: str
    timestamp: Optional[int] = None
    node: Optional[int] = None
    pair: Optional[Tuple[int, int]] = None
    message: str

    def __str__(self) -> str:
        return self.message

import numpy as np
import pytest
import torch

from dynood.graph_core.graph import build_snapshot
from dynood.graph_core.schemas import DynamicGraph, LabelKind, LabelSet


def make_graph(num_nodes, edge_lists, features=None, feature_dim=3, labels=None, seed=0):
    """DynamicGraph from one edge list per timestamp; features default to seeded Gaussians."""
    rng = np.random.default_rng(seed)
    snapshots = []
    for t, edges in enumerate(edge_lists, start=1):
        x = features[t - 1] if features is not None else rng.standard_normal((num_nodes, feature_dim))
        snapshots.append(build_snapshot(num_nodes, edges, x, t))
    return DynamicGraph(snapshots=tuple(snapshots), node_count=num_nodes, labels=labels)


def random_graph(num_nodes, num_timestamps, density=0.3, feature_dim=3, seed=0, labels=None):
    rng = np.random.default_rng(seed)
    edge_lists = []
    for _ in range(num_timestamps):
        rows, cols = np.triu_indices(num_nodes, k=1)
        keep = rng.random(len(rows)) < density
        edge_lists.append(list(zip(rows[keep].tolist(), cols[keep].tolist())))
    return make_graph(num_nodes, edge_lists, feature_dim=feature_dim, labels=labels, seed=seed + 1)


@pytest.fixture
def tiny_graph():
    """6 nodes, 3 snapshots, link labels at T + 1."""
    edges = [
        [(0, 1), (1, 2), (3, 4)],
        [(0, 1), (2, 3), (4, 5), (0, 5)],
        [(1, 2), (2, 3), (3, 4), (0, 5)],
    ]
    labels = LabelSet(kind=LabelKind.LINK_OCCURRENCE, links=((0, 1, 4), (2, 4, 4), (3, 5, 4)))
    return make_graph(6, edges, labels=labels)


@pytest.fixture
def class_graph():
    """8 nodes, 4 snapshots, two classes that also drive the edges."""
    edges = [[(0, 1), (2, 3), (4, 5), (6, 7)], [(0, 2), (1, 3), (4, 6), (5, 7)],
             [(0, 3), (1, 2), (4, 7), (5, 6)], [(0, 1), (2, 3), (4, 5), (6, 7)]]
    classes = np.array([1, 1, 1, 1, 2, 2, 2, 2])
    labels = LabelSet(kind=LabelKind.NODE_CLASS, classes={t: classes for t in range(1, 5)})
    return make_graph(8, edges, labels=labels)


@pytest.fixture
def float64():
    previous = torch.get_default_dtype()
    torch.set_default_dtype(torch.float64)
    yield
    torch.set_default_dtype(previous)

"""Train/test views that withhold edges matching a provenance rule."""
import logging
from typing import Iterable, Tuple, Union

import numpy as np

from ..graph_core.schemas import DynamicGraph, Snapshot
from ..shared.exceptions import DomainError

logger = logging.getLogger(__name__)

Rule = Union[str, Iterable[str], None]


def parse_rule(rule: Rule) -> frozenset:
    if rule is None:
        return frozenset()
    if isinstance(rule, str):
        return frozenset(part.strip() for part in rule.split(",") if part.strip())
    return frozenset(rule)


def _filter_snapshot(snap: Snapshot, tags: frozenset) -> Tuple[Snapshot, int]:
    removed = [key for key, tag in snap.edge_tags.items() if tag in tags]
    if not removed:
        return snap, 0
    adjacency = np.array(snap.adjacency)
    for u, v in removed:
        adjacency[u, v] = adjacency[v, u] = 0
    edge_tags = {key: tag for key, tag in snap.edge_tags.items() if tag not in tags}
    return Snapshot(adjacency=adjacency, features=snap.features, timestamp=snap.timestamp, edge_tags=edge_tags), len(removed)


def ood_split_links(g: DynamicGraph, rule: Rule) -> Tuple[DynamicGraph, DynamicGraph]:
    """(train view, test view): the train view drops every tagged edge the rule names.

    The test view is the unfiltered graph. Node sets are never changed.
    """
    tags = parse_rule(rule)
    if not tags:
        return g, g
    snapshots, removed, total = [], 0, 0
    for snap in g.snapshots:
        filtered, count = _filter_snapshot(snap, tags)
        snapshots.append(filtered)
        removed += count
        total += len(snap.edges())
    labels = g.labels
    if labels is not None and labels.link_tags:
        dropped = {key for key, tag in labels.link_tags.items() if tag in tags}
        links = tuple(link for link in labels.links
                      if (min(link[0], link[1]), max(link[0], link[1]), link[2]) not in dropped)
        removed += len(labels.links) - len(links)
        total += len(labels.links)
        labels = labels.model_copy(update={
            "links": links,
            "link_tags": {key: tag for key, tag in labels.link_tags.items() if key not in dropped},
        })
    if removed == 0:
        logger.warning(f"OOD rule {sorted(tags)} matched no edges; train and test views are identical")
    elif removed == total:
        raise DomainError(f"OOD rule {sorted(tags)} removes every edge from the training view")
    else:
        logger.info(f"OOD rule {sorted(tags)} withholds {removed} of {total} edges from training")
    train_view = DynamicGraph(snapshots=tuple(snapshots), node_count=g.node_count, labels=labels)
    return train_view, g

"""EVG1 text dataset format plus provenance and split sidecars.

Header ``EVG1 N T d kind``; per snapshot ``#t <t>`` then ``E u v`` (u < v) and
``X v f1 .. fd`` lines; optional ``#labels`` block of ``L u v t`` or ``Y v t c`` lines.
Everything is written sorted by index so that a save/load cycle is bit-exact.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..shared.exceptions import ConfigurationError, ParseError
from ..shared.kv_config import dump_kv_text, parse_kv_text, parse_range
from .config import FORMAT_MAGIC, INACTIVE_FEATURES, PROVENANCE_SUFFIX, SPLITS_SUFFIX
from .graph import build_snapshot
from .schemas import DynamicGraph, LabelKind, LabelSet

logger = logging.getLogger(__name__)


def _fmt(value: float) -> str:
    return repr(float(value))


def dumps(g: DynamicGraph) -> str:
    kind = g.labels.kind.value if g.labels is not None else "none"
    lines = [f"{FORMAT_MAGIC} {g.node_count} {g.num_timestamps} {g.feature_dim} {kind}"]
    for snap in g.snapshots:
        lines.append(f"#t {snap.timestamp}")
        lines.extend(f"E {u} {v}" for u, v in snap.edges())
        for v, row in enumerate(snap.features):
            lines.append(" ".join(["X", str(v)] + [_fmt(x) for x in row]))
    if g.labels is not None:
        lines.append("#labels")
        if g.labels.kind == LabelKind.LINK_OCCURRENCE:
            for u, v, t in sorted(g.labels.links, key=lambda link: (link[2], link[0], link[1])):
                lines.append(f"L {u} {v} {t}")
        else:
            for t in sorted(g.labels.classes):
                lines.extend(f"Y {v} {t} {int(c)}" for v, c in enumerate(g.labels.classes[t]))
    return "\n".join(lines) + "\n"


def _index(value: str, upper: int, what: str, lineno: int, lower: int = 0) -> int:
    index = int(value)
    if not lower <= index < upper:
        raise ParseError(f"{what} {index} outside {lower}..{upper - 1}", line=lineno)
    return index


def loads(text: str, inactive_features: str = INACTIVE_FEATURES) -> DynamicGraph:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty dataset file", line=1)
    header = lines[0].split()
    if len(header) != 5 or header[0] != FORMAT_MAGIC:
        raise ParseError(f"expected header '{FORMAT_MAGIC} N T d kind'", line=1)
    try:
        n, num_t, dim = int(header[1]), int(header[2]), int(header[3])
    except ValueError:
        raise ParseError("non-integer N, T or d in header", line=1)
    kind = header[4]
    if kind not in ("none", LabelKind.LINK_OCCURRENCE.value, LabelKind.NODE_CLASS.value):
        raise ParseError(f"unknown label kind {kind!r}", line=1)

    edges: Dict[int, List[Tuple[int, int]]] = {t: [] for t in range(1, num_t + 1)}
    features = np.zeros((num_t, n, dim), dtype=np.float64)
    seen = np.zeros((num_t, n), dtype=bool)
    links: List[Tuple[int, int, int]] = []
    classes: Dict[int, np.ndarray] = {}
    current: Optional[int] = None
    in_labels = False

    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts:
            continue
        try:
            tag = parts[0]
            if tag == "#t":
                current = int(parts[1])
                if not 1 <= current <= num_t:
                    raise ParseError(f"snapshot timestamp {current} outside 1..{num_t}", line=lineno)
                in_labels = False
            elif tag == "#labels":
                in_labels = True
                current = None
            elif tag == "E" and current is not None:
                if len(parts) != 3:
                    raise ParseError("expected 'E u v'", line=lineno)
                edges[current].append((_index(parts[1], n, "node", lineno), _index(parts[2], n, "node", lineno)))
            elif tag == "X" and current is not None:
                v = _index(parts[1], n, "node", lineno)
                values = [float(x) for x in parts[2:]]
                if len(values) != dim:
                    raise ParseError(f"expected {dim} feature values, got {len(values)}", line=lineno)
                features[current - 1, v] = values
                seen[current - 1, v] = True
            elif tag == "L" and in_labels:
                links.append((int(parts[1]), int(parts[2]), int(parts[3])))
            elif tag == "Y" and in_labels:
                v = _index(parts[1], n, "node", lineno)
                t = _index(parts[2], num_t + 2, "timestamp", lineno, lower=1)
                c = int(parts[3])
                classes.setdefault(t, np.zeros(n, dtype=np.int64))[v] = c
            else:
                raise ParseError(f"unexpected record {raw.strip()!r}", line=lineno)
        except (ValueError, IndexError):
            raise ParseError(f"malformed record {raw.strip()!r}", line=lineno)

    if inactive_features == "carry":
        for t in range(1, num_t):
            missing = ~seen[t]
            features[t, missing] = features[t - 1, missing]
            seen[t] |= seen[t - 1]

    snapshots = tuple(build_snapshot(n, edges[t], features[t - 1], t) for t in range(1, num_t + 1))
    labels = None
    if kind != "none":
        labels = LabelSet(kind=LabelKind(kind), links=tuple(links), classes=classes)
    return DynamicGraph(snapshots=snapshots, node_count=n, labels=labels)


def save(g: DynamicGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(g), encoding="utf-8")
    if any(snap.edge_tags for snap in g.snapshots) or (g.labels is not None and g.labels.link_tags):
        save_provenance(g, provenance_path(path))
    logger.info(f"Wrote dataset with N={g.node_count}, T={g.num_timestamps} to {path}")


def load(path: str | Path, inactive_features: str = INACTIVE_FEATURES) -> DynamicGraph:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Dataset not found: {path}")
    graph = loads(path.read_text(encoding="utf-8"), inactive_features=inactive_features)
    sidecar = path.with_suffix(PROVENANCE_SUFFIX)
    if sidecar.is_file():
        graph = attach_provenance(graph, load_provenance(sidecar, graph.node_count))
    return graph


def dumps_provenance(g: DynamicGraph) -> str:
    lines = []
    for snap in g.snapshots:
        for (u, v), tag in sorted(snap.edge_tags.items()):
            lines.append(f"{snap.timestamp} {u} {v} {tag}")
    if g.labels is not None:
        for (u, v, t), tag in sorted(g.labels.link_tags.items(), key=lambda item: (item[0][2], item[0][0], item[0][1])):
            lines.append(f"{t} {u} {v} {tag}")
    return "\n".join(lines) + ("\n" if lines else "")


def save_provenance(g: DynamicGraph, path: str | Path) -> None:
    Path(path).write_text(dumps_provenance(g), encoding="utf-8")


def load_provenance(path: str | Path, node_count: Optional[int] = None) -> Dict[int, Dict[Tuple[int, int], str]]:
    tags: Dict[int, Dict[Tuple[int, int], str]] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise ParseError("expected 't u v tag'", line=lineno)
        try:
            t, u, v = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError("non-integer t, u or v", line=lineno)
        if node_count is not None:
            _index(parts[1], node_count, "node", lineno)
            _index(parts[2], node_count, "node", lineno)
        tags.setdefault(t, {})[(min(u, v), max(u, v))] = parts[3]
    return tags


def attach_provenance(g: DynamicGraph, tags: Dict[int, Dict[Tuple[int, int], str]]) -> DynamicGraph:
    snapshots = tuple(
        snap.model_copy(update={"edge_tags": {
            key: tag for key, tag in tags.get(snap.timestamp, {}).items() if snap.adjacency[key] == 1
        }})
        for snap in g.snapshots
    )
    labels = g.labels
    if labels is not None and labels.kind == LabelKind.LINK_OCCURRENCE:
        positives = {(min(u, v), max(u, v), t) for u, v, t in labels.links}
        link_tags = {
            (u, v, t): tag
            for t, by_pair in tags.items() if t > g.num_timestamps
            for (u, v), tag in by_pair.items() if (u, v, t) in positives
        }
        labels = labels.model_copy(update={"link_tags": link_tags})
    return g.model_copy(update={"snapshots": snapshots, "labels": labels})


def save_splits(splits: Dict[str, Tuple[int, int]], path: str | Path) -> None:
    Path(path).write_text(dump_kv_text(splits), encoding="utf-8")


def load_splits(path: str | Path) -> Dict[str, Tuple[int, int]]:
    path = Path(path)
    if not path.is_file():
        return {}
    return {name: parse_range(value) for name, value in parse_kv_text(path.read_text(encoding="utf-8")).items()}


def splits_path(dataset_path: str | Path) -> Path:
    return Path(dataset_path).with_suffix(SPLITS_SUFFIX)


def provenance_path(dataset_path: str | Path) -> Path:
    return Path(dataset_path).with_suffix(PROVENANCE_SUFFIX)

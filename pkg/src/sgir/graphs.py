"""Scene-graph types and preprocessing.

Raw annotations arrive as (subject, predicate, object) triples over a list of
object instances. Preprocessing lifts every predicate into a node of its own,
so a triple (s, p, o) becomes edges s -> p and p -> o, then drops isolated
nodes and re-indexes. Downstream code only ever sees the lifted form.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import ClassEmbeddingTable, table_digest
from .errors import EmptyGraphError, FormatError, UsageError, VocabularyError

log = logging.getLogger(__name__)

CORPUS_SCHEMA = "records-v1"
GRAPHS_FORMAT_VERSION = 1


@dataclass
class RawAnnotation:
    image_id: str
    objects: list[str]
    relations: list[tuple[int, str, int]]
    scene_label: str | None = None


@dataclass
class SceneGraph:
    """Lifted graph: nodes carry class ids, edges are directed pairs."""

    graph_id: str
    class_ids: list[int]
    edges: list[tuple[int, int]]
    scene_label: str | None = None

    def __post_init__(self):
        n = len(self.class_ids)
        seen: set[tuple[int, int]] = set()
        for src, dst in self.edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise FormatError(f"{self.graph_id}: edge ({src}, {dst}) out of "
                                  f"range for {n} nodes")
            if src == dst:
                raise FormatError(f"{self.graph_id}: self-loop on node {src}")
            if (src, dst) in seen:
                raise FormatError(f"{self.graph_id}: duplicate edge ({src}, {dst})")
            seen.add((src, dst))
        for cid in self.class_ids:
            if cid < 0:
                raise FormatError(f"{self.graph_id}: negative class id {cid}")

    @property
    def n(self) -> int:
        return len(self.class_ids)


@dataclass
class GraphMatrices:
    graph_id: str
    features: np.ndarray     # (n, d) float64, rows are class embeddings
    adjacency: np.ndarray    # (n, n) float64 binary, zero diagonal
    scene_label: str | None = None
    class_ids: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def parse_corpus(path: str | Path, schema: str = CORPUS_SCHEMA,
                 vocabulary: set[str] | None = None) -> list[RawAnnotation]:
    """Parse a raw-annotation corpus file.

    The only supported schema is "records-v1": a JSON array of records with
    image_id, objects (class-name strings), relations ([src, predicate, dst]
    with integer indices into objects), and an optional scene_label. If a
    vocabulary is supplied, every class name must be in it.
    """
    if schema != CORPUS_SCHEMA:
        raise UsageError(f"unsupported corpus schema {schema!r}")
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(data, list):
        raise FormatError(f"{path}: corpus must be a JSON array of records")
    records: list[RawAnnotation] = []
    seen_ids: set[str] = set()
    for idx, rec in enumerate(data):
        where = f"{path}: record {idx}"
        if not isinstance(rec, dict):
            raise FormatError(f"{where}: not an object")
        image_id = rec.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            raise FormatError(f"{where}: missing or empty image_id")
        if image_id in seen_ids:
            raise FormatError(f"{where}: duplicate image_id {image_id!r}")
        seen_ids.add(image_id)
        objects = rec.get("objects")
        if not isinstance(objects, list) or not all(isinstance(o, str) for o in objects):
            raise FormatError(f"{where}: objects must be a list of class names")
        relations_raw = rec.get("relations")
        if not isinstance(relations_raw, list):
            raise FormatError(f"{where}: relations must be a list")
        relations: list[tuple[int, str, int]] = []
        for r_idx, rel in enumerate(relations_raw):
            if (not isinstance(rel, list) or len(rel) != 3
                    or not isinstance(rel[0], int) or not isinstance(rel[1], str)
                    or not isinstance(rel[2], int)):
                raise FormatError(f"{where}: relation {r_idx} must be "
                                  f"[src_index, predicate, dst_index]")
            src, pred, dst = rel
            if not (0 <= src < len(objects)) or not (0 <= dst < len(objects)):
                raise FormatError(f"{where}: relation {r_idx} references object "
                                  f"{max(src, dst)} but only {len(objects)} exist")
            relations.append((src, pred, dst))
        label = rec.get("scene_label")
        if label is not None and not isinstance(label, str):
            raise FormatError(f"{where}: scene_label must be a string or null")
        if vocabulary is not None:
            for name in objects:
                if name not in vocabulary:
                    raise VocabularyError(f"{where}: unknown object class {name!r}")
            for _, pred, _ in relations:
                if pred not in vocabulary:
                    raise VocabularyError(f"{where}: unknown predicate class {pred!r}")
        records.append(RawAnnotation(image_id, list(objects), relations, label))
    return records


def lift_predicates_to_nodes(raw: RawAnnotation,
                             class_to_id: dict[str, int]) -> SceneGraph:
    """Reify predicates: (s, p, o) becomes a predicate node with edges
    s -> p and p -> o. Object nodes come first in input order, predicate nodes
    follow in relation order. Exact duplicate triples collapse to one."""
    class_ids: list[int] = []
    for name in raw.objects:
        cid = class_to_id.get(name)
        if cid is None:
            raise VocabularyError(f"{raw.image_id}: unknown object class {name!r}")
        class_ids.append(cid)
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, str, int]] = set()
    for src, pred, dst in raw.relations:
        triple = (src, pred, dst)
        if triple in seen:
            continue
        seen.add(triple)
        pid = class_to_id.get(pred)
        if pid is None:
            raise VocabularyError(f"{raw.image_id}: unknown predicate class {pred!r}")
        pred_node = len(class_ids)
        class_ids.append(pid)
        edges.append((src, pred_node))
        edges.append((pred_node, dst))
    return SceneGraph(raw.image_id, class_ids, edges, raw.scene_label)


def remove_isolated_nodes(g: SceneGraph) -> SceneGraph:
    """Drop nodes with no incident edges in either direction, re-indexing the
    survivors contiguously in their original order."""
    touched = [False] * g.n
    for src, dst in g.edges:
        touched[src] = True
        touched[dst] = True
    if not any(touched):
        raise EmptyGraphError(f"{g.graph_id}: no nodes remain after dropping "
                              f"isolated nodes")
    remap: dict[int, int] = {}
    class_ids: list[int] = []
    for old, keep in enumerate(touched):
        if keep:
            remap[old] = len(class_ids)
            class_ids.append(g.class_ids[old])
    edges = [(remap[s], remap[d]) for s, d in g.edges]
    return SceneGraph(g.graph_id, class_ids, edges, g.scene_label)


def build_matrices(g: SceneGraph, table: ClassEmbeddingTable) -> GraphMatrices:
    """Dense feature and adjacency matrices for one lifted graph."""
    for cid in g.class_ids:
        if cid >= table.class_count:
            raise VocabularyError(f"{g.graph_id}: class id {cid} outside table "
                                  f"of {table.class_count} classes")
    features = table.vectors[np.asarray(g.class_ids, dtype=np.intp)].copy()
    adjacency = np.zeros((g.n, g.n), dtype=np.float64)
    for src, dst in g.edges:
        adjacency[src, dst] = 1.0
    return GraphMatrices(g.graph_id, features, adjacency, g.scene_label,
                         list(g.class_ids))


def preprocess_corpus(records: list[RawAnnotation], table: ClassEmbeddingTable
                      ) -> tuple[list[SceneGraph], int]:
    """Full pipeline over a parsed corpus: lift, drop isolated nodes, drop
    graphs that end up empty (with a warning). Returns (graphs, dropped)."""
    class_to_id = {name: i for i, name in enumerate(table.class_names)}
    graphs: list[SceneGraph] = []
    dropped = 0
    for raw in records:
        lifted = lift_predicates_to_nodes(raw, class_to_id)
        try:
            graphs.append(remove_isolated_nodes(lifted))
        except EmptyGraphError:
            dropped += 1
            log.warning("dropping %s: empty after preprocessing", raw.image_id)
    return graphs, dropped


@dataclass
class GraphsFile:
    """Parsed contents of a preprocessed-graph file."""
    graphs: list[SceneGraph]
    class_names: list[str]
    object_class_count: int
    table_digest: str


def save_graphs(graphs: list[SceneGraph], table: ClassEmbeddingTable,
                path: str | Path) -> None:
    """Preprocessed-graph file: explicit nodes, edges, and class ids, plus a
    vocabulary echo and table digest so later stages can refuse a mismatched
    embedding table."""
    doc = {
        "format_version": GRAPHS_FORMAT_VERSION,
        "class_names": table.class_names,
        "object_class_count": table.object_class_count,
        "table_digest": table_digest(table),
        "graphs": [
            {
                "graph_id": g.graph_id,
                "scene_label": g.scene_label,
                "class_ids": g.class_ids,
                "edges": [list(e) for e in g.edges],
            }
            for g in graphs
        ],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, separators=(",", ":"))
                          + "\n", encoding="utf-8")


def load_graphs(path: str | Path) -> GraphsFile:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format_version") != GRAPHS_FORMAT_VERSION:
        raise FormatError(f"{path}: not a preprocessed-graph file")
    graphs = []
    seen: set[str] = set()
    for entry in doc["graphs"]:
        gid = entry["graph_id"]
        if gid in seen:
            raise FormatError(f"{path}: duplicate graph_id {gid!r}")
        seen.add(gid)
        graphs.append(SceneGraph(gid, list(entry["class_ids"]),
                                 [tuple(e) for e in entry["edges"]],
                                 entry.get("scene_label")))
    return GraphsFile(graphs, list(doc["class_names"]),
                      int(doc["object_class_count"]),
                      str(doc.get("table_digest", "")))


def _max_path_length(g: SceneGraph) -> int:
    """Longest shortest path over the undirected form (max over components)."""
    nbrs: list[set[int]] = [set() for _ in range(g.n)]
    for s, d in g.edges:
        nbrs[s].add(d)
        nbrs[d].add(s)
    best = 0
    for start in range(g.n):
        dist = {start: 0}
        frontier = [start]
        while frontier:
            nxt = []
            for v in frontier:
                for u in nbrs[v]:
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        best = max(best, max(dist.values()))
    return best


def corpus_stats(graphs: list[SceneGraph], dropped: int = 0) -> dict:
    """Node/edge count and path-length summary for a preprocessed corpus."""
    nodes = [g.n for g in graphs]
    edges = [len(g.edges) for g in graphs]
    paths = [_max_path_length(g) for g in graphs]

    def summary(values: list[int]) -> dict:
        if not values:
            return {"mean": 0.0, "min": 0, "max": 0, "histogram": {}}
        hist: dict[str, int] = {}
        for v in sorted(values):
            hist[str(v)] = hist.get(str(v), 0) + 1
        return {"mean": float(np.mean(values)), "min": int(min(values)),
                "max": int(max(values)), "histogram": hist}

    return {
        "graph_count": len(graphs),
        "dropped_empty": dropped,
        "node_count": summary(nodes),
        "edge_count": summary(edges),
        "max_path_length": summary(paths),
    }

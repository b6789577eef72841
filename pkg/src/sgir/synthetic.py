"""Reproducible synthetic corpora for desk-scale runs and tests.

Graphs are drawn from themes: each theme prefers a contiguous slice of the
object and predicate vocabulary, so graphs within a theme are close in edit
distance and separable from other themes. That gives a trained model real
structure to pick up at corpus sizes where a real dataset would be overkill.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .graphs import RawAnnotation, SceneGraph
from .rng import substream


def _theme_pool(n_classes: int, n_themes: int, theme: int) -> list[int]:
    base = n_classes // n_themes
    lo = theme * base
    hi = n_classes if theme == n_themes - 1 else lo + base
    return list(range(lo, hi))


def themed_corpus(seed: int, n_graphs: int, n_object_classes: int,
                  n_predicate_classes: int, n_themes: int = 4,
                  objects_range: tuple[int, int] = (3, 6),
                  extra_relation_prob: float = 0.25,
                  labeled: bool = True, id_prefix: str = "g") -> list[dict]:
    """Random themed scene annotations in corpus-record form.

    Object classes are drawn without replacement within a graph, and predicate
    classes repeat within a graph only once the theme pool is exhausted. Nodes
    that share a class have identical feature rows, which makes them
    indistinguishable to any encoder when their neighborhoods coincide too; a
    corpus riddled with such collisions caps reconstruction quality well below
    what the model can express.
    """
    if n_themes < 1 or n_object_classes < n_themes or n_predicate_classes < n_themes:
        raise ConfigError("need at least one object and predicate class per theme")
    lo, hi = objects_range
    if lo < 2:
        raise ConfigError("objects_range must start at 2 so every graph has "
                          "at least one relation")
    if hi > n_object_classes // n_themes:
        raise ConfigError(f"objects_range {objects_range} exceeds the "
                          f"{n_object_classes // n_themes} object classes per "
                          f"theme; graphs draw object classes without replacement")
    rng = substream(seed, "synth-corpus")
    records: list[dict] = []
    for idx in range(n_graphs):
        theme = int(rng.integers(n_themes))
        obj_pool = _theme_pool(n_object_classes, n_themes, theme)
        pred_pool = _theme_pool(n_predicate_classes, n_themes, theme)
        count = int(rng.integers(lo, hi + 1))
        chosen = rng.choice(obj_pool, size=count, replace=False)
        objects = [f"obj_{int(c):03d}" for c in chosen]
        pred_seq = [int(p) for p in rng.permutation(pred_pool)]
        n_preds = 0

        def next_pred() -> str:
            nonlocal n_preds
            pred = pred_seq[n_preds % len(pred_seq)]
            n_preds += 1
            return f"pred_{pred:03d}"

        relations: list[list] = []
        for i in range(1, count):
            j = int(rng.integers(i))
            src, dst = (i, j) if rng.random() < 0.5 else (j, i)
            relations.append([src, next_pred(), dst])
        for i in range(count):
            for j in range(i + 1, count):
                if rng.random() < extra_relation_prob / max(count - 1, 1):
                    relations.append([i, next_pred(), j])
        records.append({
            "image_id": f"{id_prefix}{idx:04d}",
            "objects": objects,
            "relations": relations,
            "scene_label": f"scene_{theme}" if labeled else None,
        })
    return records


def clique_corpus(seed: int, n_graphs: int, n_classes: int,
                  cliques_range: tuple[int, int] = (2, 3),
                  size_range: tuple[int, int] = (2, 4),
                  id_prefix: str = "g") -> list[SceneGraph]:
    """Graphs made of disjoint cliques over distinct classes, as class-id
    graphs (no predicate lifting).

    Disjoint cliques are exactly what a Gram-product edge decoder can
    represent: per-graph group directions only need to be pairwise
    non-aligned, which low latent widths already afford. That makes this
    family the reconstruction benchmark of choice; lifted scene annotations
    are bipartite and cap edge accuracy well below what cliques allow.
    """
    lo_k, hi_k = cliques_range
    lo_s, hi_s = size_range
    if lo_k < 1 or lo_s < 2:
        raise ConfigError("need at least one clique of at least two nodes")
    if hi_k * hi_s > n_classes:
        raise ConfigError(f"a graph may need up to {hi_k * hi_s} distinct "
                          f"classes but only {n_classes} exist")
    rng = substream(seed, "clique-corpus")
    out: list[SceneGraph] = []
    for idx in range(n_graphs):
        k = int(rng.integers(lo_k, hi_k + 1))
        sizes = [int(rng.integers(lo_s, hi_s + 1)) for _ in range(k)]
        classes = [int(c) for c in rng.choice(n_classes, size=sum(sizes),
                                              replace=False)]
        edges = []
        start = 0
        for size in sizes:
            for i in range(start, start + size):
                for j in range(i + 1, start + size):
                    edges.append((i, j))
            start += size
        out.append(SceneGraph(f"{id_prefix}{idx:04d}", classes, edges, None))
    return out


def near_duplicate_corpus(seed: int, n_total: int, n_pairs: int,
                          n_object_classes: int, n_predicate_classes: int,
                          **kwargs) -> tuple[list[dict], list[tuple[str, str]]]:
    """Corpus of n_total graphs where the first n_pairs base graphs each get a
    twin differing in exactly one object's class. Returns (records, pairs)."""
    if 2 * n_pairs > n_total:
        raise ConfigError(f"{n_pairs} pairs do not fit in {n_total} graphs")
    base = themed_corpus(seed, n_total - n_pairs, n_object_classes,
                         n_predicate_classes, **kwargs)
    rng = substream(seed, "near-duplicates")
    pairs: list[tuple[str, str]] = []
    twins: list[dict] = []
    for rec in base[:n_pairs]:
        twin = json.loads(json.dumps(rec))
        twin["image_id"] = rec["image_id"] + "_dup"
        slot = int(rng.integers(len(twin["objects"])))
        in_use = set(twin["objects"])
        free = [c for c in range(n_object_classes)
                if f"obj_{c:03d}" not in in_use]
        twin["objects"][slot] = f"obj_{int(rng.choice(free)):03d}"
        twins.append(twin)
        pairs.append((rec["image_id"], twin["image_id"]))
    return base + twins, pairs


def clique_near_duplicate_corpus(
        seed: int, n_base: int, n_pairs: int, n_classes: int,
        cliques_range: tuple[int, int] = (2, 3),
        size_range: tuple[int, int] = (2, 4),
        id_prefix: str = "g") -> tuple[list[SceneGraph], list[tuple[str, str]]]:
    """Clique-family corpus where the first n_pairs graphs each get a twin
    differing in exactly one node's class. Returns (graphs, pairs); the
    n_base + n_pairs graphs come base-first, twins appended in pair order.

    The twin keeps the base graph's wiring, so edit distance between the two
    is a single substitution — the closest non-identical neighbor a corpus
    can plant.
    """
    if n_pairs > n_base:
        raise ConfigError(f"{n_pairs} pairs need at least {n_pairs} base graphs")
    base = clique_corpus(seed, n_base, n_classes, cliques_range, size_range,
                         id_prefix=id_prefix)
    rng = substream(seed, "near-duplicates")
    graphs = list(base)
    pairs: list[tuple[str, str]] = []
    for g in base[:n_pairs]:
        in_use = set(g.class_ids)
        free = [c for c in range(n_classes) if c not in in_use]
        slot = int(rng.integers(len(g.class_ids)))
        classes = list(g.class_ids)
        classes[slot] = int(rng.choice(free))
        twin = SceneGraph(g.graph_id + "_dup", classes, list(g.edges), None)
        graphs.append(twin)
        pairs.append((g.graph_id, twin.graph_id))
    return graphs, pairs


def write_corpus(records: list[dict], path: str | Path) -> None:
    Path(path).write_text(json.dumps(records, sort_keys=True) + "\n",
                          encoding="utf-8")


def records_to_annotations(records: list[dict]) -> list[RawAnnotation]:
    """Convenience for in-memory pipelines (tests, ablations)."""
    return [RawAnnotation(rec["image_id"], list(rec["objects"]),
                          [tuple(r) for r in rec["relations"]],
                          rec.get("scene_label"))
            for rec in records]

"""Ranked-retrieval evaluation against GED golden rankings.

The golden ranking for a query sorts candidates by ascending edit distance
(ties broken by input order). Distances turn into inverse scores
s = 1 / (1 + d), which are min-max scaled onto the graded-relevance range
[1, 10] over the query's candidate set; the binary relevant set is the top 50
candidates by distance. Counterfactual mode restricts candidates to scenes
with a different label and marks only the distance-minimal one relevant.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IntegrityError, ShapeError

log = logging.getLogger(__name__)

GOLDEN_TOP_N = 50
GRADE_LO = 1.0
GRADE_HI = 10.0


@dataclass
class RankedList:
    query_id: str
    candidate_ids: list[str]
    scores: list[float]

    def __post_init__(self):
        if len(self.candidate_ids) != len(self.scores):
            raise ShapeError(f"{self.query_id}: {len(self.candidate_ids)} ids "
                             f"vs {len(self.scores)} scores")
        if len(set(self.candidate_ids)) != len(self.candidate_ids):
            raise IntegrityError(f"{self.query_id}: duplicate candidate ids")


@dataclass
class RelevanceAssignment:
    query_id: str
    grades: dict[str, float]       # one grade per candidate
    relevant: frozenset[str] = field(default_factory=frozenset)


def cosine_rank(query_id: str, query_vec: np.ndarray, candidate_ids: list[str],
                candidate_vecs: np.ndarray) -> RankedList:
    """Candidates sorted by descending cosine similarity to the query. Ties
    keep the input candidate order. Zero vectors score 0 with a warning."""
    query_vec = np.asarray(query_vec, dtype=np.float64).reshape(-1)
    candidate_vecs = np.asarray(candidate_vecs, dtype=np.float64)
    if candidate_vecs.ndim != 2 or candidate_vecs.shape[0] != len(candidate_ids):
        raise ShapeError(f"{query_id}: candidate matrix "
                         f"{candidate_vecs.shape} vs {len(candidate_ids)} ids")
    if candidate_vecs.shape[1] != query_vec.size:
        raise ShapeError(f"{query_id}: query dim {query_vec.size} vs candidate "
                         f"dim {candidate_vecs.shape[1]}")
    qn = np.linalg.norm(query_vec)
    cn = np.linalg.norm(candidate_vecs, axis=1)
    if qn == 0.0:
        log.warning("%s: zero query embedding, all similarities set to 0",
                    query_id)
        sims = np.zeros(len(candidate_ids))
    else:
        sims = np.zeros(len(candidate_ids))
        nonzero = cn > 0.0
        if not np.all(nonzero):
            log.warning("%s: %d zero candidate embeddings score 0", query_id,
                        int((~nonzero).sum()))
        sims[nonzero] = (candidate_vecs[nonzero] @ query_vec) / (cn[nonzero] * qn)
    order = sorted(range(len(candidate_ids)), key=lambda i: -sims[i])
    return RankedList(query_id,
                      [candidate_ids[i] for i in order],
                      [float(sims[i]) for i in order])


def golden_ranking(query_id: str, candidate_ids: list[str],
                   distances: np.ndarray, top_n: int = GOLDEN_TOP_N
                   ) -> tuple[RankedList, RelevanceAssignment]:
    """GED-based golden ranking and graded/binary relevance for one query."""
    distances = np.asarray(distances, dtype=np.float64).reshape(-1)
    if distances.size != len(candidate_ids):
        raise ShapeError(f"{query_id}: {distances.size} distances vs "
                         f"{len(candidate_ids)} candidates")
    if distances.size == 0:
        raise ShapeError(f"{query_id}: no candidates")
    if np.any(distances < 0.0) or not np.all(np.isfinite(distances)):
        raise ShapeError(f"{query_id}: distances must be finite and >= 0")
    if top_n < 1:
        raise ConfigError("top_n must be >= 1")
    order = sorted(range(len(candidate_ids)), key=lambda i: distances[i])
    scores = 1.0 / (1.0 + distances)
    s_min, s_max = float(scores.min()), float(scores.max())
    if s_max == s_min:
        grades = {cid: GRADE_HI for cid in candidate_ids}
    else:
        span = s_max - s_min
        grades = {cid: GRADE_LO + (GRADE_HI - GRADE_LO)
                  * (float(scores[i]) - s_min) / span
                  for i, cid in enumerate(candidate_ids)}
    relevant = frozenset(candidate_ids[i] for i in order[:min(top_n, len(order))])
    ranked = RankedList(query_id,
                        [candidate_ids[i] for i in order],
                        [float(scores[i]) for i in order])
    return ranked, RelevanceAssignment(query_id, grades, relevant)


def _check_alignment(ranked: RankedList, rel: RelevanceAssignment) -> None:
    if ranked.query_id != rel.query_id:
        raise IntegrityError(f"ranking for {ranked.query_id!r} scored against "
                             f"relevance for {rel.query_id!r}")
    missing = [cid for cid in ranked.candidate_ids if cid not in rel.grades]
    if missing:
        raise IntegrityError(f"{ranked.query_id}: no grade for candidate "
                             f"{missing[0]!r}")


def ndcg_at_k(ranked: RankedList, rel: RelevanceAssignment, k: int) -> float:
    """Graded NDCG with (2^grade - 1) gains and log2(rank + 1) discounts. The
    ideal ranking is the graded candidates sorted by descending grade."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    _check_alignment(ranked, rel)
    dcg = 0.0
    for i, cid in enumerate(ranked.candidate_ids[:k], start=1):
        dcg += (2.0 ** rel.grades[cid] - 1.0) / np.log2(i + 1.0)
    ideal = sorted(rel.grades.values(), reverse=True)
    idcg = 0.0
    for i, grade in enumerate(ideal[:k], start=1):
        idcg += (2.0 ** grade - 1.0) / np.log2(i + 1.0)
    return float(dcg / idcg) if idcg > 0.0 else 0.0


def map_at_k(ranked: RankedList, rel: RelevanceAssignment, k: int) -> float:
    """Truncated average precision: precision summed at each relevant hit in
    the top k, divided by min(|relevant|, k)."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    _check_alignment(ranked, rel)
    denom = min(len(rel.relevant), k)
    if denom == 0:
        return 0.0
    hits = 0
    total = 0.0
    for i, cid in enumerate(ranked.candidate_ids[:k], start=1):
        if cid in rel.relevant:
            hits += 1
            total += hits / i
    return total / denom


def mrr(ranked: RankedList, rel: RelevanceAssignment) -> float:
    """Reciprocal rank of the first relevant candidate, 0 when none appears."""
    _check_alignment(ranked, rel)
    for i, cid in enumerate(ranked.candidate_ids, start=1):
        if cid in rel.relevant:
            return 1.0 / i
    return 0.0


def counterfactual_rank(query_id: str, query_label: str | None,
                        query_vec: np.ndarray, candidate_ids: list[str],
                        candidate_vecs: np.ndarray,
                        candidate_labels: list[str | None],
                        distances: np.ndarray
                        ) -> tuple[RankedList, RelevanceAssignment] | None:
    """Counterfactual protocol for one query: keep only candidates whose
    scene label differs from the query's, rank them by cosine similarity, and
    mark exactly the distance-minimal survivor (first by input order on ties)
    as relevant with a binary grade. Returns None when the query has no label
    or no candidate survives the filter."""
    if len(candidate_ids) != len(candidate_labels):
        raise ShapeError(f"{query_id}: {len(candidate_labels)} labels for "
                         f"{len(candidate_ids)} candidates")
    if query_label is None:
        log.warning("%s: unlabeled query skipped in counterfactual mode",
                    query_id)
        return None
    distances = np.asarray(distances, dtype=np.float64).reshape(-1)
    keep = [i for i, lab in enumerate(candidate_labels)
            if lab is not None and lab != query_label]
    if not keep:
        log.warning("%s: no differently-labeled candidates, query skipped",
                    query_id)
        return None
    kept_ids = [candidate_ids[i] for i in keep]
    ranked = cosine_rank(query_id, query_vec,
                         kept_ids, np.asarray(candidate_vecs)[keep])
    best = min(range(len(keep)), key=lambda pos: distances[keep[pos]])
    target = kept_ids[best]
    grades = {cid: (1.0 if cid == target else 0.0) for cid in kept_ids}
    return ranked, RelevanceAssignment(query_id, grades, frozenset({target}))


# ---------------------------------------------------------------------------
# corpus-level evaluation

@dataclass
class MetricsReport:
    mode: str
    query_count: int
    skipped: int
    ndcg: dict[int, float]
    ap: dict[int, float]
    mrr: float

    def rows(self) -> list[tuple[str, int | None, float]]:
        out: list[tuple[str, int | None, float]] = []
        for k in sorted(self.ndcg):
            out.append(("ndcg", k, self.ndcg[k]))
        for k in sorted(self.ap):
            out.append(("map", k, self.ap[k]))
        out.append(("mrr", None, self.mrr))
        return out

    def to_json(self) -> str:
        doc = {
            "mode": self.mode,
            "query_count": self.query_count,
            "skipped": self.skipped,
            "ndcg": {str(k): v for k, v in sorted(self.ndcg.items())},
            "map": {str(k): v for k, v in sorted(self.ap.items())},
            "mrr": self.mrr,
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        lines = ["metric,k,value"]
        for name, k, value in self.rows():
            lines.append(f"{name},{'' if k is None else k},{value!r}")
        return "\n".join(lines) + "\n"


def _check_ids(graph_ids: list[str], matrix: np.ndarray) -> None:
    n = len(graph_ids)
    if matrix.shape != (n, n):
        raise IntegrityError(f"distance matrix {matrix.shape} does not cover "
                             f"{n} graphs")
    if len(set(graph_ids)) != n:
        raise IntegrityError("duplicate graph ids")


def evaluate_run(graph_ids: list[str], embeddings: np.ndarray,
                 matrix: np.ndarray, ks: list[int],
                 top_n: int = GOLDEN_TOP_N) -> MetricsReport:
    """Mean NDCG@k / MAP@k / MRR over every graph as a query against all
    others, with golden rankings from the distance matrix."""
    _check_ids(graph_ids, matrix)
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.shape[0] != len(graph_ids):
        raise IntegrityError(f"{embeddings.shape[0]} embeddings for "
                             f"{len(graph_ids)} graphs")
    if not ks or any(k < 1 for k in ks):
        raise ConfigError("ks must be a non-empty list of ranks >= 1")
    if len(graph_ids) < 2:
        raise ConfigError("need at least two graphs to evaluate")
    ndcg_sums = {k: 0.0 for k in ks}
    ap_sums = {k: 0.0 for k in ks}
    mrr_sum = 0.0
    n = len(graph_ids)
    for q in range(n):
        others = [i for i in range(n) if i != q]
        cand_ids = [graph_ids[i] for i in others]
        ranked = cosine_rank(graph_ids[q], embeddings[q], cand_ids,
                             embeddings[others])
        _, rel = golden_ranking(graph_ids[q], cand_ids, matrix[q, others],
                                top_n)
        for k in ks:
            ndcg_sums[k] += ndcg_at_k(ranked, rel, k)
            ap_sums[k] += map_at_k(ranked, rel, k)
        mrr_sum += mrr(ranked, rel)
    return MetricsReport(
        mode="standard", query_count=n, skipped=0,
        ndcg={k: ndcg_sums[k] / n for k in ks},
        ap={k: ap_sums[k] / n for k in ks},
        mrr=mrr_sum / n)


def counterfactual_evaluate(graph_ids: list[str], embeddings: np.ndarray,
                            labels: list[str | None],
                            matrix: np.ndarray) -> MetricsReport:
    """Counterfactual retrieval report: binary NDCG@1, MAP@3, and MRR over
    label-filtered candidate sets. Queries without a usable candidate set are
    skipped and counted."""
    _check_ids(graph_ids, matrix)
    if len(labels) != len(graph_ids):
        raise IntegrityError(f"{len(labels)} labels for {len(graph_ids)} graphs")
    embeddings = np.asarray(embeddings, dtype=np.float64)
    n = len(graph_ids)
    ndcg_sum = 0.0
    ap_sum = 0.0
    mrr_sum = 0.0
    scored = 0
    skipped = 0
    for q in range(n):
        others = [i for i in range(n) if i != q]
        result = counterfactual_rank(
            graph_ids[q], labels[q], embeddings[q],
            [graph_ids[i] for i in others], embeddings[others],
            [labels[i] for i in others], matrix[q, others])
        if result is None:
            skipped += 1
            continue
        ranked, rel = result
        ndcg_sum += ndcg_at_k(ranked, rel, 1)
        ap_sum += map_at_k(ranked, rel, 3)
        mrr_sum += mrr(ranked, rel)
        scored += 1
    if scored == 0:
        raise ConfigError("every query was skipped; counterfactual mode needs "
                          "labeled scenes with at least two distinct labels")
    return MetricsReport(
        mode="counterfactual", query_count=scored, skipped=skipped,
        ndcg={1: ndcg_sum / scored},
        ap={3: ap_sum / scored},
        mrr=mrr_sum / scored)

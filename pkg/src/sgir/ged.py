"""Graph edit distance under a semantic cost model.

Node substitution costs the cosine distance between the two class embeddings;
node insertion/deletion costs the cosine distance between the class embedding
and the mean object-class embedding. Edges are unlabeled and undirected for
editing purposes: indel costs a constant (default 1.0), substitution another
(default 0.0).

exact_ged is a branch-and-bound over complete node assignments (epsilon moves
included) with an admissible lower bound, restricted to small graphs by a
node budget. approx_ged builds the classic bipartite (n1+n2) x (n1+n2)
assignment problem with local edge terms, solves it exactly, then prices the
full edit path the assignment induces, so its distance is always an upper
bound on the exact one.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .container import read_container, write_container
from .embeddings import ClassEmbeddingTable, mean_embedding
from .errors import ConfigError, ShapeError, SizeError
from .graphs import SceneGraph

BIG_COST = 1e12
DEFAULT_NODE_BUDGET = 8


@dataclass
class GedCostModel:
    """Precomputed node/edge edit costs over a class-embedding table."""
    sub_costs: np.ndarray          # (k, k) cosine distances, exact zeros on diag
    indel_costs: np.ndarray        # (k,) cosine distance to the mean anchor
    edge_indel_cost: float = 1.0
    edge_sub_cost: float = 0.0

    def node_sub_cost(self, class_a: int, class_b: int) -> float:
        if class_a == class_b:
            return 0.0
        return float(self.sub_costs[class_a, class_b])

    def node_indel_cost(self, class_a: int) -> float:
        return float(self.indel_costs[class_a])


def build_cost_model(table: ClassEmbeddingTable, edge_indel_cost: float = 1.0,
                     edge_sub_cost: float = 0.0,
                     constant_indel_cost: float | None = None) -> GedCostModel:
    if edge_indel_cost < 0.0 or edge_sub_cost < 0.0:
        raise ConfigError("edge costs must be non-negative")
    norms = np.linalg.norm(table.vectors, axis=1)
    if np.any(norms == 0.0):
        bad = table.class_names[int(np.argmin(norms))]
        raise ConfigError(f"class {bad!r} has a zero embedding; cosine costs "
                          f"are undefined")
    unit = table.vectors / norms[:, None]
    sub = 1.0 - unit @ unit.T
    np.fill_diagonal(sub, 0.0)
    sub = np.maximum(sub, 0.0)
    if constant_indel_cost is not None:
        if constant_indel_cost < 0.0:
            raise ConfigError("constant_indel_cost must be non-negative")
        indel = np.full(table.class_count, float(constant_indel_cost))
    else:
        anchor = mean_embedding(table, objects_only=True)
        anchor_norm = np.linalg.norm(anchor)
        if anchor_norm == 0.0:
            raise ConfigError("mean object-class embedding is zero; pass "
                              "constant_indel_cost to use a fixed indel cost")
        indel = np.maximum(1.0 - unit @ (anchor / anchor_norm), 0.0)
    return GedCostModel(sub, indel, float(edge_indel_cost), float(edge_sub_cost))


@dataclass
class GedResult:
    distance: float
    mapping: list[tuple[int | None, int | None]] = field(default_factory=list)
    exact: bool = False


def _undirected_edges(g: SceneGraph) -> list[tuple[int, int]]:
    seen: set[tuple[int, int]] = set()
    for s, d in g.edges:
        seen.add((s, d) if s < d else (d, s))
    return sorted(seen)


def _degrees(n: int, edges: list[tuple[int, int]]) -> np.ndarray:
    deg = np.zeros(n, dtype=np.intp)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    return deg


def mapping_cost(g1: SceneGraph, g2: SceneGraph, model: GedCostModel,
                 assignment: list[int | None]) -> float:
    """True edit cost of a complete assignment (g1 node -> g2 node or None;
    uncovered g2 nodes count as insertions)."""
    if len(assignment) != g1.n:
        raise ShapeError(f"assignment covers {len(assignment)} of {g1.n} nodes")
    covered = [j for j in assignment if j is not None]
    if len(set(covered)) != len(covered):
        raise ShapeError("assignment maps two nodes to the same target")
    cost = 0.0
    for i, j in enumerate(assignment):
        if j is None:
            cost += model.node_indel_cost(g1.class_ids[i])
        else:
            cost += model.node_sub_cost(g1.class_ids[i], g2.class_ids[j])
    covered_set = set(covered)
    for j in range(g2.n):
        if j not in covered_set:
            cost += model.node_indel_cost(g2.class_ids[j])
    e1 = _undirected_edges(g1)
    e2 = set(_undirected_edges(g2))
    matched = 0
    for a, b in e1:
        ja, jb = assignment[a], assignment[b]
        if ja is not None and jb is not None:
            pair = (ja, jb) if ja < jb else (jb, ja)
            if pair in e2:
                matched += 1
                cost += model.edge_sub_cost
                continue
        cost += model.edge_indel_cost
    cost += model.edge_indel_cost * (len(e2) - matched)
    return cost


def approx_ged(g1: SceneGraph, g2: SceneGraph, model: GedCostModel) -> GedResult:
    """Bipartite-assignment upper bound. Both directions are solved and the
    cheaper induced edit path wins, so the result is symmetric in its inputs."""
    fwd = _approx_one_direction(g1, g2, model)
    bwd = _approx_one_direction(g2, g1, model)
    if bwd.distance < fwd.distance:
        flipped = [(j, i) for i, j in bwd.mapping]
        return GedResult(bwd.distance, flipped, exact=False)
    return fwd


def _approx_one_direction(g1: SceneGraph, g2: SceneGraph,
                          model: GedCostModel) -> GedResult:
    n1, n2 = g1.n, g2.n
    deg1 = _degrees(n1, _undirected_edges(g1))
    deg2 = _degrees(n2, _undirected_edges(g2))
    size = n1 + n2
    cost = np.full((size, size), BIG_COST)
    for i in range(n1):
        ci = g1.class_ids[i]
        for j in range(n2):
            local = (model.edge_sub_cost * min(deg1[i], deg2[j])
                     + model.edge_indel_cost * abs(int(deg1[i]) - int(deg2[j])))
            cost[i, j] = model.node_sub_cost(ci, g2.class_ids[j]) + local
        cost[i, n2 + i] = (model.node_indel_cost(ci)
                           + model.edge_indel_cost * deg1[i])
    for j in range(n2):
        cost[n1 + j, j] = (model.node_indel_cost(g2.class_ids[j])
                           + model.edge_indel_cost * deg2[j])
    cost[n1:, n2:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    assignment: list[int | None] = [None] * n1
    for r, c in zip(rows, cols):
        if r < n1 and c < n2:
            assignment[r] = int(c)
    distance = mapping_cost(g1, g2, model, assignment)
    mapping = _mapping_pairs(assignment, n2)
    return GedResult(distance, mapping, exact=False)


def _mapping_pairs(assignment: list[int | None], n2: int
                   ) -> list[tuple[int | None, int | None]]:
    pairs: list[tuple[int | None, int | None]] = []
    covered: set[int] = set()
    for i, j in enumerate(assignment):
        pairs.append((i, j))
        if j is not None:
            covered.add(j)
    for j in range(n2):
        if j not in covered:
            pairs.append((None, j))
    return pairs


def exact_ged(g1: SceneGraph, g2: SceneGraph, model: GedCostModel,
              node_budget: int = DEFAULT_NODE_BUDGET) -> GedResult:
    """Minimum edit cost by branch-and-bound over complete assignments.

    Refuses graphs larger than node_budget: the search is exponential and the
    budget is the contract that keeps it tractable.
    """
    for g in (g1, g2):
        if g.n > node_budget:
            raise SizeError(f"{g.graph_id}: {g.n} nodes exceeds the exact-GED "
                            f"budget of {node_budget}")
    n1, n2 = g1.n, g2.n
    sub = np.empty((n1, n2))
    for i in range(n1):
        for j in range(n2):
            sub[i, j] = model.node_sub_cost(g1.class_ids[i], g2.class_ids[j])
    dels = np.array([model.node_indel_cost(c) for c in g1.class_ids]) \
        if n1 else np.zeros(0)
    ins = np.array([model.node_indel_cost(c) for c in g2.class_ids]) \
        if n2 else np.zeros(0)
    e1 = _undirected_edges(g1)
    e2set = set(_undirected_edges(g2))
    nbr1: list[list[int]] = [[] for _ in range(n1)]
    for a, b in e1:
        nbr1[a].append(b)
        nbr1[b].append(a)

    incumbent = approx_ged(g1, g2, model)
    best = {"cost": incumbent.distance,
            "assignment": [j for _, j in
                           sorted((i, j) for i, j in incumbent.mapping
                                  if i is not None)]}

    def completion_cost(assignment: list[int | None], used: set[int]) -> float:
        extra = 0.0
        for j in range(n2):
            if j not in used:
                extra += ins[j]
        for u, v in e2set:
            if u not in used or v not in used:
                extra += model.edge_indel_cost
        return extra

    def lower_bound(depth: int, used: set[int]) -> float:
        avail = [j for j in range(n2) if j not in used]
        lb = 0.0
        for i in range(depth, n1):
            cheapest = dels[i]
            for j in avail:
                if sub[i, j] < cheapest:
                    cheapest = sub[i, j]
            lb += cheapest
        surplus = len(avail) - (n1 - depth)
        if surplus > 0:
            lb += sum(sorted(ins[j] for j in avail)[:surplus])
        return lb

    assignment: list[int | None] = [None] * n1
    used: set[int] = set()

    def edge_delta(depth: int, j: int | None) -> float:
        delta = 0.0
        for k in nbr1[depth]:
            if k >= depth:
                continue
            jk = assignment[k]
            if j is None or jk is None:
                delta += model.edge_indel_cost
            else:
                pair = (jk, j) if jk < j else (j, jk)
                delta += (model.edge_sub_cost if pair in e2set
                          else model.edge_indel_cost)
        if j is not None:
            # g2 edges between j and already-used targets with no g1 edge
            for k in range(depth):
                jk = assignment[k]
                if jk is None or k in nbr1[depth]:
                    continue
                pair = (jk, j) if jk < j else (j, jk)
                if pair in e2set:
                    delta += model.edge_indel_cost
        return delta

    def search(depth: int, cost: float) -> None:
        if cost + lower_bound(depth, used) > best["cost"] + 1e-12:
            return
        if depth == n1:
            total = cost + completion_cost(assignment, used)
            if total < best["cost"]:
                best["cost"] = total
                best["assignment"] = list(assignment)
            return
        # try substitutions, cheapest node cost first
        order = sorted(range(n2), key=lambda j: sub[depth, j])
        for j in order:
            if j in used:
                continue
            step = sub[depth, j] + edge_delta(depth, j)
            assignment[depth] = j
            used.add(j)
            search(depth + 1, cost + step)
            used.discard(j)
            assignment[depth] = None
        # deletion branch
        step = dels[depth] + edge_delta(depth, None)
        assignment[depth] = None
        search(depth + 1, cost + step)

    search(0, 0.0)
    final = mapping_cost(g1, g2, model, best["assignment"])
    return GedResult(final, _mapping_pairs(best["assignment"], n2), exact=True)


# ---------------------------------------------------------------------------
# all-pairs matrices

_WORKER: dict = {}


def _init_worker(graphs, model, mode, node_budget):
    _WORKER.update(graphs=graphs, model=model, mode=mode,
                   node_budget=node_budget)


def _chunk_distances(pairs: list[tuple[int, int]]) -> list[tuple[int, int, float]]:
    graphs = _WORKER["graphs"]
    model = _WORKER["model"]
    exact = _WORKER["mode"] == "exact"
    out = []
    for i, j in pairs:
        if exact:
            res = exact_ged(graphs[i], graphs[j], model, _WORKER["node_budget"])
        else:
            res = approx_ged(graphs[i], graphs[j], model)
        out.append((i, j, res.distance))
    return out


def allpairs_ged(graphs: list[SceneGraph], model: GedCostModel,
                 mode: str = "approx", node_budget: int = DEFAULT_NODE_BUDGET,
                 workers: int = 1) -> np.ndarray:
    """Symmetric distance matrix over the corpus (zero diagonal). In exact
    mode every graph must fit the node budget; there is no silent fallback."""
    if mode not in ("approx", "exact"):
        raise ConfigError(f"unknown GED mode {mode!r}")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    if mode == "exact":
        for g in graphs:
            if g.n > node_budget:
                raise SizeError(f"{g.graph_id}: {g.n} nodes exceeds the "
                                f"exact-GED budget of {node_budget}; use "
                                f"approx mode or raise the budget")
    n = len(graphs)
    matrix = np.zeros((n, n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if workers == 1 or len(pairs) < 2:
        _init_worker(graphs, model, mode, node_budget)
        results = _chunk_distances(pairs)
    else:
        chunk_size = max(1, (len(pairs) + workers - 1) // workers)
        chunks = [pairs[k:k + chunk_size] for k in range(0, len(pairs), chunk_size)]
        results = []
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(graphs, model, mode, node_budget)) as ex:
            for part in ex.map(_chunk_distances, chunks):
                results.extend(part)
    for i, j, dist in results:
        matrix[i, j] = dist
        matrix[j, i] = dist
    return matrix


# ---------------------------------------------------------------------------
# distance-matrix files

MATRIX_KIND = "ged-matrix"


def save_distance_matrix(path, graph_ids: list[str], matrix: np.ndarray,
                         meta: dict | None = None) -> None:
    n = len(graph_ids)
    if matrix.shape != (n, n):
        raise ShapeError(f"matrix {matrix.shape} vs {n} graph ids")
    iu = np.triu_indices(n, k=1)
    upper = matrix[iu]
    full_meta = {"n": n, "graph_ids": list(graph_ids)}
    if meta:
        full_meta.update(meta)
    write_container(path, MATRIX_KIND, {"upper_triangle": upper}, full_meta)


def load_distance_matrix(path) -> tuple[list[str], np.ndarray, dict]:
    header, arrays = read_container(path, expect_kind=MATRIX_KIND)
    meta = header["meta"]
    n = int(meta["n"])
    ids = list(meta["graph_ids"])
    matrix = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    upper = arrays["upper_triangle"].reshape(-1)
    if upper.size != iu[0].size:
        raise ShapeError(f"{path}: upper triangle has {upper.size} entries, "
                         f"expected {iu[0].size}")
    matrix[iu] = upper
    matrix = matrix + matrix.T
    return ids, matrix, meta


def distance_matrix_csv(graph_ids: list[str], matrix: np.ndarray) -> str:
    lines = ["i,j,graph_i,graph_j,distance"]
    n = len(graph_ids)
    for i in range(n):
        for j in range(i + 1, n):
            lines.append(f"{i},{j},{graph_ids[i]},{graph_ids[j]},"
                         f"{float(matrix[i, j])!r}")
    return "\n".join(lines) + "\n"

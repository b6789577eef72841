"""Shared test utilities: finite-difference gradient checks, a brute-force
edit-distance oracle, and small graph builders."""

from __future__ import annotations

import itertools

import numpy as np

import sgir.autodiff as ad
from sgir.autodiff import Tensor
from sgir.ged import GedCostModel, mapping_cost
from sgir.graphs import GraphMatrices, SceneGraph, build_matrices
from sgir.model import ModelConfig, compute_loss, encode, init_model
from sgir.rng import substream

# ---------------------------------------------------------------------------
# finite-difference gradient checking

FD_STEP = 1e-6
FD_TOL = 1e-3


def fd_gradient(f, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central finite differences of the scalar function f with respect to the
    array x, which f must read live (mutations here must be visible to f)."""
    grad = np.zeros_like(x)
    flat_x = x.reshape(-1)
    flat_g = grad.reshape(-1)
    for i in range(flat_x.size):
        orig = flat_x[i]
        flat_x[i] = orig + h
        hi = f()
        flat_x[i] = orig - h
        lo = f()
        flat_x[i] = orig
        flat_g[i] = (hi - lo) / (2.0 * h)
    return grad


def gradient_mismatches(computed: np.ndarray, expected: np.ndarray,
                        label: str, tol: float = FD_TOL) -> list[str]:
    """Entries where the two gradients disagree by more than tol relative to
    max(1, |expected|)."""
    if computed is None:
        return [f"{label}: no gradient accumulated"]
    err = np.abs(computed - expected) / np.maximum(1.0, np.abs(expected))
    bad = np.argwhere(err > tol)
    return [f"{label}[{tuple(ix)}]: got {computed[tuple(ix)]:.8g}, "
            f"finite differences say {expected[tuple(ix)]:.8g}"
            for ix in bad[:3]]


def _away_from(x: np.ndarray, kinks: list[float], margin: float = 0.05
               ) -> np.ndarray:
    """Nudge entries of x away from non-differentiable points."""
    out = x.copy()
    for kink in kinks:
        close = np.abs(out - kink) < margin
        out[close] = kink + margin * np.where(out[close] >= kink, 1.0, -1.0) * 2.0
    return out


def primitive_cases(rng: np.random.Generator):
    """(name, build) pairs covering every differentiable primitive. Each build
    returns (inputs_to_check, loss_fn) where loss_fn rebuilds the graph from
    the current .data of the inputs and returns a scalar Tensor."""
    a3x4 = rng.standard_normal((3, 4))
    b4x2 = rng.standard_normal((4, 2))
    c3x4 = rng.standard_normal((3, 4))
    row = rng.standard_normal((1, 4))
    r3x4 = rng.standard_normal((3, 4))
    r3x2 = rng.standard_normal((3, 2))
    r4x3 = rng.standard_normal((4, 3))
    r1x4 = rng.standard_normal((1, 4))
    pos = rng.uniform(0.2, 2.0, size=(3, 4))
    probs = rng.uniform(0.05, 0.95, size=(3, 4))
    logits = rng.standard_normal((3, 4)) * 2.0
    target = (rng.random((3, 4)) < 0.5).astype(np.float64)
    mask = (rng.random((3, 4)) < 0.7).astype(np.float64)
    if mask.sum() == 0.0:
        mask[0, 0] = 1.0
    relu_in = _away_from(rng.standard_normal((3, 4)), [0.0])
    clamp_in = _away_from(rng.standard_normal((3, 4)), [-0.8, 0.8])
    mu = rng.standard_normal((3, 4))
    log_sigma = rng.uniform(-2.0, 1.0, size=(3, 4))

    def proj(expr: Tensor, r: np.ndarray) -> Tensor:
        return ad.sum_all(ad.mul(expr, Tensor(r)))

    cases = []

    def case(name, tensors, fn):
        cases.append((name, tensors, fn))

    ta, tb = Tensor(a3x4, True, "a"), Tensor(b4x2, True, "b")
    case("matmul", [ta, tb], lambda: proj(ad.matmul(ta, tb), r3x2))
    tc = Tensor(c3x4, True, "c")
    ta2 = Tensor(a3x4, True, "a")
    case("add", [ta2, tc], lambda: proj(ad.add(ta2, tc), r3x4))
    trow = Tensor(row, True, "row")
    ta3 = Tensor(a3x4, True, "a")
    case("add_broadcast", [ta3, trow], lambda: proj(ad.add(ta3, trow), r3x4))
    ta4, tc4 = Tensor(a3x4, True, "a"), Tensor(c3x4, True, "c")
    case("sub", [ta4, tc4], lambda: proj(ad.sub(ta4, tc4), r3x4))
    ta5, tc5 = Tensor(a3x4, True, "a"), Tensor(c3x4, True, "c")
    case("mul", [ta5, tc5], lambda: proj(ad.mul(ta5, tc5), r3x4))
    ta6 = Tensor(a3x4, True, "a")
    case("scale", [ta6], lambda: proj(ad.scale(ta6, -1.7), r3x4))
    ta7 = Tensor(a3x4, True, "a")
    case("add_scalar", [ta7], lambda: proj(ad.add_scalar(ta7, 2.5), r3x4))
    trelu = Tensor(relu_in, True, "x")
    case("relu", [trelu], lambda: proj(ad.relu(trelu), r3x4))
    tsig = Tensor(a3x4, True, "x")
    case("sigmoid", [tsig], lambda: proj(ad.sigmoid(tsig), r3x4))
    texp = Tensor(a3x4, True, "x")
    case("exp", [texp], lambda: proj(ad.exp(texp), r3x4))
    tlog = Tensor(pos, True, "x")
    case("log", [tlog], lambda: proj(ad.log(tlog), r3x4))
    tclamp = Tensor(clamp_in, True, "x")
    case("clamp", [tclamp], lambda: proj(ad.clamp(tclamp, -0.8, 0.8), r3x4))
    ttr = Tensor(a3x4, True, "x")
    case("transpose", [ttr], lambda: proj(ad.transpose(ttr), r4x3))
    tsr = Tensor(a3x4, True, "x")
    case("sum_rows", [tsr], lambda: proj(ad.sum_rows(tsr), r1x4))
    tsa = Tensor(a3x4, True, "x")
    case("sum_all", [tsa], lambda: ad.sum_all(tsa))
    tma = Tensor(a3x4, True, "x")
    case("mean_all", [tma], lambda: ad.mean_all(tma))
    tmse = Tensor(a3x4, True, "pred")
    case("mse_loss", [tmse], lambda: ad.mse_loss(tmse, Tensor(c3x4)))
    tbce = Tensor(probs, True, "probs")
    case("weighted_bce_loss", [tbce],
         lambda: ad.weighted_bce_loss(tbce, Tensor(target), 1.7, 0.8, mask))
    tbwl = Tensor(logits, True, "logits")
    case("weighted_bce_with_logits", [tbwl],
         lambda: ad.weighted_bce_with_logits(tbwl, Tensor(target), 1.7, 0.8,
                                             mask))
    tmu = Tensor(mu, True, "mu")
    tls = Tensor(log_sigma, True, "log_sigma")
    case("kl_gaussian", [tmu, tls], lambda: ad.kl_gaussian(tmu, tls))
    return cases


def run_primitive_gradient_suite(n_seeds: int) -> list[str]:
    """Check every primitive against central finite differences across
    n_seeds random draws; returns a list of mismatch descriptions."""
    failures: list[str] = []
    for seed in range(n_seeds):
        rng = substream(seed, "gradient-suite")
        for name, tensors, loss_fn in primitive_cases(rng):
            ad.zero_grad(tensors)
            ad.backward(loss_fn())
            for t in tensors:
                expected = fd_gradient(lambda: loss_fn().item(), t.data)
                failures.extend(gradient_mismatches(
                    t.grad, expected, f"seed {seed} {name}/{t.name}"))
    return failures


def tiny_loss_model(gnn_kind: str, seed: int):
    """A 4-node graph and a small model for whole-loss gradient checks.
    Returns (graph, checkpoint, loss_fn) with deterministic sampling noise so
    the loss is a pure function of the parameters."""
    rng = substream(seed, "gradient-suite-loss")
    features = rng.standard_normal((4, 6))
    adjacency = np.zeros((4, 4))
    for src, dst in ((0, 1), (1, 2), (2, 3), (0, 3)):
        adjacency[src, dst] = 1.0
    graph = GraphMatrices("fd", features, adjacency)
    config = ModelConfig(gnn_kind=gnn_kind, encoder_layers=3, hidden_dim=5,
                         latent_dim=3, edge_decoder_out=4,
                         feature_decoder_out=6, seed=seed)
    ckpt = init_model(config, 6)
    # The zero-initialized sigma output weights sit exactly on relu kinks
    # upstream; jitter every parameter so finite differences are taken at a
    # generic point.
    jitter = substream(seed, "gradient-suite-jitter")
    for p in ckpt.params.values():
        p.data = p.data + 0.05 * jitter.standard_normal(p.data.shape)

    def loss_fn() -> Tensor:
        latent = encode(graph, ckpt, "train", substream(seed, "fd-noise"))
        total, _ = compute_loss(graph, latent, ckpt)
        return total

    return graph, ckpt, loss_fn


def run_loss_gradient_suite(n_seeds: int, coords_per_param_set: int = 6
                            ) -> list[str]:
    """Check the full composite training loss against finite differences on a
    random subset of parameter coordinates, for n_seeds models split across
    both encoder kinds."""
    failures: list[str] = []
    for seed in range(n_seeds):
        kind = "gcn" if seed % 2 == 0 else "gin"
        _, ckpt, loss_fn = tiny_loss_model(kind, seed)
        params = list(ckpt.params.values())
        ad.zero_grad(params)
        ad.backward(loss_fn())
        picker = substream(seed, "gradient-suite-coords")
        names = sorted(ckpt.params)
        for _ in range(coords_per_param_set):
            name = names[int(picker.integers(len(names)))]
            tensor = ckpt.params[name]
            flat = tensor.data.reshape(-1)
            i = int(picker.integers(flat.size))
            orig = flat[i]
            step = 1e-5
            flat[i] = orig + step
            hi = loss_fn().item()
            flat[i] = orig - step
            lo = loss_fn().item()
            flat[i] = orig
            expected = (hi - lo) / (2.0 * step)
            got = 0.0 if tensor.grad is None else tensor.grad.reshape(-1)[i]
            if abs(got - expected) > FD_TOL * max(1.0, abs(expected)):
                failures.append(f"seed {seed} {kind} loss/{name}[{i}]: got "
                                f"{got:.8g}, finite differences say "
                                f"{expected:.8g}")
    return failures


# ---------------------------------------------------------------------------
# brute-force edit-distance oracle

def enumerate_ged(g1: SceneGraph, g2: SceneGraph, model: GedCostModel) -> float:
    """Minimum edit cost by exhaustive enumeration of every complete
    assignment (each node of g1 keeps a distinct target in g2 or is deleted;
    uncovered g2 nodes are insertions). Exponential; tiny graphs only."""
    n1, n2 = g1.n, g2.n
    best = np.inf
    for r in range(0, min(n1, n2) + 1):
        for kept in itertools.combinations(range(n1), r):
            for targets in itertools.permutations(range(n2), r):
                assignment: list[int | None] = [None] * n1
                for i, j in zip(kept, targets):
                    assignment[i] = j
                cost = mapping_cost(g1, g2, model, assignment)
                if cost < best:
                    best = cost
    return best


# ---------------------------------------------------------------------------
# small graph builders

STRUCTURES = ("path", "cycle", "star", "tree")


def structured_graph(graph_id: str, n: int, classes: list[int],
                     kind: str) -> SceneGraph:
    if kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "star":
        edges = [(0, i) for i in range(1, n)]
    elif kind == "tree":
        edges = [((i - 1) // 2, i) for i in range(1, n)]
    else:
        raise ValueError(kind)
    return SceneGraph(graph_id, classes, edges, None)


def random_small_graphs(seed: int, count: int, n_lo: int, n_hi: int,
                        n_classes: int, prefix: str = "g") -> list[SceneGraph]:
    """Mixed-topology graphs with classes drawn with replacement, so class
    multisets collide across graphs and structure matters."""
    rng = substream(seed, "small-structured")
    out = []
    for idx in range(count):
        n = int(rng.integers(n_lo, n_hi + 1))
        kind = STRUCTURES[int(rng.integers(len(STRUCTURES)))]
        classes = [int(c) for c in rng.integers(0, n_classes, size=n)]
        out.append(structured_graph(f"{prefix}{idx:04d}", n, classes, kind))
    return out


def permuted_copy(g: SceneGraph, perm: np.ndarray) -> SceneGraph:
    """The same graph with node i renamed to perm[i]."""
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm))
    classes = [g.class_ids[int(inverse[v])] for v in range(g.n)]
    edges = [(int(perm[s]), int(perm[d])) for s, d in g.edges]
    return SceneGraph(g.graph_id + "_perm", classes, edges, g.scene_label)


def matrices_for(graphs, table):
    return [build_matrices(g, table) for g in graphs]

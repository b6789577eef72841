"""Variational graph autoencoder with adversarial regularization.

The encoder is a stack of message-passing layers (GCN or GIN) with two output
branches, one for the latent mean and one for the latent log-sigma. Decoding
reconstructs node features with an MLP and edges with a Gram matrix over
MLP-projected latents; a small MLP discriminator pushes the aggregate
posterior toward the standard normal prior.

Two forward paths exist on purpose. Training uses plain dense matmuls through
the autodiff engine. Inference (graph_embedding, encode in "infer" mode) runs
the mu branch only, aggregating neighbor terms and pooling rows in a
content-determined order: summands are sorted by their byte representation
before accumulation, which makes embeddings of a graph and any node
permutation of it equal bit for bit. The two paths agree to float rounding.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .container import read_container, write_container
from .errors import ConfigError, NumericsError, ShapeError
from .graphs import GraphMatrices
from .rng import substream

GNN_KINDS = ("gcn", "gin")

# Initial bias of the sigma branch's output layer (see init_model).
LOG_SIGMA_INIT = -3.0


@dataclass
class ModelConfig:
    gnn_kind: str = "gin"
    encoder_layers: int = 3
    split_encoder: bool = True
    hidden_dim: int = 256
    latent_dim: int = 1000
    edge_decoder_out: int = 32
    feature_decoder_out: int = 768
    gin_eps: float = 0.0
    use_variational: bool = True
    use_discriminator: bool = True
    use_mlp_decoders: bool = True
    use_edge_decoder: bool = True
    use_feature_decoder: bool = True
    use_pos_weight: bool = True
    lambda_recon: float = 3.0
    lambda_adv: float = 1.0 / 6.0
    lambda_kl: float = 1.0 / 3.0
    epochs: int = 30
    batch_size: int = 64
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.01
    lr_gamma: float = 0.95
    seed: int = 0

    def validate(self) -> None:
        if self.gnn_kind not in GNN_KINDS:
            raise ConfigError(f"gnn_kind must be one of {GNN_KINDS}, "
                              f"got {self.gnn_kind!r}")
        for name in ("encoder_layers", "hidden_dim", "latent_dim",
                     "edge_decoder_out", "feature_decoder_out", "epochs",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("lambda_recon", "lambda_adv", "lambda_kl", "lr"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive")
        if not (0.0 < self.lr_gamma <= 1.0):
            raise ConfigError("lr_gamma must be in (0, 1]")
        for name in ("beta1", "beta2"):
            if not (0.0 <= getattr(self, name) < 1.0):
                raise ConfigError(f"{name} must be in [0, 1)")
        if self.weight_decay < 0.0:
            raise ConfigError("weight_decay must be >= 0")


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict[str, Tensor]    # insertion order is the serialization order

    def model_params(self) -> list[Tensor]:
        return [p for name, p in self.params.items()
                if not name.startswith("disc_")]

    def disc_params(self) -> list[Tensor]:
        return [p for name, p in self.params.items() if name.startswith("disc_")]


@dataclass
class LatentOutput:
    z_mu: Tensor
    z_log_sigma: Tensor | None
    z_sample: Tensor


# ---------------------------------------------------------------------------
# parameter construction

def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _encoder_widths(config: ModelConfig, feature_dim: int) -> list[int]:
    return ([feature_dim]
            + [config.hidden_dim] * (config.encoder_layers - 1)
            + [config.latent_dim])


def _encoder_prefixes(config: ModelConfig, branch: str) -> list[str]:
    """Parameter-name prefixes for the given branch, layer by layer."""
    last = config.encoder_layers
    out = []
    for i in range(1, last + 1):
        if not config.split_encoder and i < last:
            out.append(f"enc_shared_{i}")
        else:
            out.append(f"enc_{branch}_{i}")
    return out


def init_model(config: ModelConfig, feature_dim: int) -> Checkpoint:
    """Fresh parameters: Glorot-uniform weights, zero biases, drawn in a fixed
    order from the "init" substream of config.seed."""
    config.validate()
    if feature_dim != config.feature_decoder_out:
        raise ConfigError(f"feature_decoder_out {config.feature_decoder_out} "
                          f"must equal the input feature dim {feature_dim}")
    rng = substream(config.seed, "init")
    params: dict[str, Tensor] = {}

    def param(name: str, arr: np.ndarray) -> None:
        params[name] = Tensor(arr, requires_grad=True, name=name)

    def linear(prefix: str, fan_in: int, fan_out: int) -> None:
        param(f"{prefix}_W", _glorot(rng, fan_in, fan_out))
        param(f"{prefix}_b", np.zeros((1, fan_out)))

    def gin_mlp(prefix: str, fan_in: int, fan_out: int) -> None:
        param(f"{prefix}_W1", _glorot(rng, fan_in, fan_out))
        param(f"{prefix}_b1", np.zeros((1, fan_out)))
        param(f"{prefix}_W2", _glorot(rng, fan_out, fan_out))
        param(f"{prefix}_b2", np.zeros((1, fan_out)))

    widths = _encoder_widths(config, feature_dim)
    branches = ("mu", "sigma") if config.use_variational else ("mu",)
    made: set[str] = set()
    for branch in branches:
        for i, prefix in enumerate(_encoder_prefixes(config, branch), start=1):
            if prefix in made:
                continue
            made.add(prefix)
            if config.gnn_kind == "gcn":
                linear(prefix, widths[i - 1], widths[i])
            else:
                gin_mlp(prefix, widths[i - 1], widths[i])
    if config.use_variational:
        # Start near-deterministic: zero the sigma branch's output weights and
        # bias them so every log-sigma is exactly LOG_SIGMA_INIT at init
        # (gradients to a final linear layer do not depend on its own value, so
        # nothing is frozen). Starting at sigma ~ 1 instead buries the
        # decoders' input in noise and the model settles into constant
        # predictions before the mean branch carries any signal.
        final = _encoder_prefixes(config, "sigma")[-1]
        if config.gnn_kind == "gcn":
            weight_name, bias_name = f"{final}_W", f"{final}_b"
        else:
            weight_name, bias_name = f"{final}_W2", f"{final}_b2"
        params[weight_name].data[:] = 0.0
        params[bias_name].data.fill(LOG_SIGMA_INIT)

    if config.use_mlp_decoders and config.use_edge_decoder:
        linear("edge_dec_1", config.latent_dim, config.hidden_dim)
        linear("edge_dec_2", config.hidden_dim, config.edge_decoder_out)
    if config.use_mlp_decoders and config.use_feature_decoder:
        linear("feat_dec_1", config.latent_dim, config.hidden_dim)
        linear("feat_dec_2", config.hidden_dim, feature_dim)
    if config.use_discriminator:
        linear("disc_1", config.latent_dim, config.hidden_dim)
        linear("disc_2", config.hidden_dim, 1)
    return Checkpoint(config, params)


def n_parameters(ckpt: Checkpoint) -> int:
    return sum(p.data.size for p in ckpt.params.values())


# ---------------------------------------------------------------------------
# layers (training path, autodiff)

def symmetrized(adj: np.ndarray) -> np.ndarray:
    """Undirected view used for propagation and edge targets: max(A, A^T)."""
    return np.maximum(adj, adj.T)


def normalized_adjacency(adj: np.ndarray) -> np.ndarray:
    """D^-1/2 (sym(A) + I) D^-1/2; self-loops keep every degree >= 1."""
    a_tilde = symmetrized(adj) + np.eye(adj.shape[0])
    inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    return a_tilde * inv_sqrt[:, None] * inv_sqrt[None, :]


def gin_aggregation(adj: np.ndarray, eps: float) -> np.ndarray:
    """(1 + eps) * own row plus plain neighbor sum, as a matrix."""
    return symmetrized(adj) + (1.0 + eps) * np.eye(adj.shape[0])


def gcn_layer(x: Tensor, adj_norm: Tensor, weight: Tensor, bias: Tensor,
              activation: bool = True) -> Tensor:
    h = ad.add(ad.matmul(adj_norm, ad.matmul(x, weight)), bias)
    return ad.relu(h) if activation else h


def gin_layer(x: Tensor, aggregation: Tensor, w1: Tensor, b1: Tensor,
              w2: Tensor, b2: Tensor, activation: bool = True) -> Tensor:
    h = ad.matmul(aggregation, x)
    h = ad.relu(ad.add(ad.matmul(h, w1), b1))
    h = ad.add(ad.matmul(h, w2), b2)
    return ad.relu(h) if activation else h


def _propagation_matrix(g: GraphMatrices, config: ModelConfig) -> Tensor:
    if config.gnn_kind == "gcn":
        return Tensor(normalized_adjacency(g.adjacency))
    return Tensor(gin_aggregation(g.adjacency, config.gin_eps))


def _encode_branch(x: Tensor, prop: Tensor, ckpt: Checkpoint, branch: str) -> Tensor:
    config = ckpt.config
    h = x
    last = config.encoder_layers
    for i, prefix in enumerate(_encoder_prefixes(config, branch), start=1):
        act = i < last
        if config.gnn_kind == "gcn":
            h = gcn_layer(h, prop, ckpt.params[f"{prefix}_W"],
                          ckpt.params[f"{prefix}_b"], act)
        else:
            h = gin_layer(h, prop, ckpt.params[f"{prefix}_W1"],
                          ckpt.params[f"{prefix}_b1"],
                          ckpt.params[f"{prefix}_W2"],
                          ckpt.params[f"{prefix}_b2"], act)
    return h


def reparameterize(z_mu: Tensor, z_log_sigma: Tensor,
                   rng: np.random.Generator) -> Tensor:
    """z = mu + exp(log_sigma) * noise, log_sigma clamped to +-10."""
    sigma = ad.exp(ad.clamp(z_log_sigma, -ad.LOG_SIGMA_CLAMP, ad.LOG_SIGMA_CLAMP))
    noise = Tensor(rng.standard_normal(z_mu.shape))
    return ad.add(z_mu, ad.mul(sigma, noise))


def encode(g: GraphMatrices, ckpt: Checkpoint, mode: str = "train",
           noise_rng: np.random.Generator | None = None) -> LatentOutput:
    """Latent output for one graph.

    "train" builds the autodiff graph over both branches and samples when the
    model is variational. "infer" runs the deterministic mu-branch forward
    with order-invariant aggregation and sets z_sample = z_mu exactly.
    """
    if mode == "infer":
        rows = _infer_mu_rows(g, ckpt)
        z = Tensor(rows)
        return LatentOutput(z, None, z)
    if mode != "train":
        raise ConfigError(f"unknown encode mode {mode!r}")
    config = ckpt.config
    if g.features.shape[1] != config.feature_decoder_out:
        raise ShapeError(f"{g.graph_id}: feature dim {g.features.shape[1]} does "
                         f"not match the model ({config.feature_decoder_out})")
    x = Tensor(g.features)
    prop = _propagation_matrix(g, config)
    z_mu = _encode_branch(x, prop, ckpt, "mu")
    if not config.use_variational:
        return LatentOutput(z_mu, None, z_mu)
    z_log_sigma = _encode_branch(x, prop, ckpt, "sigma")
    if noise_rng is None:
        noise_rng = substream(config.seed, "sampling")
    z_sample = reparameterize(z_mu, z_log_sigma, noise_rng)
    return LatentOutput(z_mu, z_log_sigma, z_sample)


def _mlp2(z: Tensor, ckpt: Checkpoint, prefix: str) -> Tensor:
    h = ad.relu(ad.add(ad.matmul(z, ckpt.params[f"{prefix}_1_W"]),
                       ckpt.params[f"{prefix}_1_b"]))
    return ad.add(ad.matmul(h, ckpt.params[f"{prefix}_2_W"]),
                  ckpt.params[f"{prefix}_2_b"])


def decode_edge_logits(z: Tensor, ckpt: Checkpoint) -> Tensor:
    """Gram matrix of projected latents (of the raw latents when MLP decoders
    are disabled); the edge-probability logits."""
    z_e = _mlp2(z, ckpt, "edge_dec") if ckpt.config.use_mlp_decoders else z
    return ad.matmul(z_e, ad.transpose(z_e))


def decode_edges(z: Tensor, ckpt: Checkpoint) -> Tensor:
    """Edge-probability matrix: sigmoid of the Gram logits."""
    return ad.sigmoid(decode_edge_logits(z, ckpt))


def decode_features(z: Tensor, ckpt: Checkpoint) -> Tensor:
    return _mlp2(z, ckpt, "feat_dec")


def discriminate(z: Tensor, ckpt: Checkpoint) -> Tensor:
    """Per-row real-vs-generated logits, shape (n, 1)."""
    return _mlp2(z, ckpt, "disc")


# ---------------------------------------------------------------------------
# loss

def _edge_weighting(a_sym: np.ndarray, mask: np.ndarray,
                    use_pos_weight: bool) -> tuple[float, float]:
    if not use_pos_weight:
        return 1.0, 1.0
    considered = mask.sum()
    pos = (a_sym * mask).sum()
    neg = considered - pos
    if pos == 0.0 or neg == 0.0:
        return 1.0, 1.0
    return neg / pos, considered / (2.0 * neg)


def compute_loss(g: GraphMatrices, latent: LatentOutput, ckpt: Checkpoint
                 ) -> tuple[Tensor, dict[str, float]]:
    """Composite training loss for one graph.

    total = lambda_recon * (feature MSE + weighted edge BCE)
          + lambda_adv   * generator BCE (non-saturating: the encoder is
                           rewarded when the discriminator calls its samples real)
          + lambda_kl    * KL to the standard normal prior

    Disabled components contribute exactly 0. The edge BCE runs over
    off-diagonal entries only: the Gram decoder's diagonal is >= 0.5 by
    construction while the adjacency diagonal is identically zero.
    """
    config = ckpt.config
    n = g.n
    zero = Tensor(np.zeros((1, 1)))
    breakdown: dict[str, float] = {}

    feat_term = zero
    if config.use_mlp_decoders and config.use_feature_decoder:
        z_f = decode_features(latent.z_sample, ckpt)
        feat_term = ad.mse_loss(z_f, Tensor(g.features))
    breakdown["feature_recon"] = feat_term.item()

    edge_term = zero
    if config.use_edge_decoder and n > 1:
        gram = decode_edge_logits(latent.z_sample, ckpt)
        a_sym = symmetrized(g.adjacency)
        mask = 1.0 - np.eye(n)
        pos_weight, norm = _edge_weighting(a_sym, mask, config.use_pos_weight)
        edge_term = ad.weighted_bce_with_logits(gram, Tensor(a_sym),
                                                pos_weight, norm, mask)
    breakdown["edge_recon"] = edge_term.item()

    adv_term = zero
    if config.use_discriminator:
        logits = discriminate(latent.z_sample, ckpt)
        adv_term = ad.weighted_bce_with_logits(logits,
                                               Tensor(np.ones(logits.shape)))
    breakdown["adversarial"] = adv_term.item()

    kl_term = zero
    if config.use_variational:
        if latent.z_log_sigma is None:
            raise ConfigError("variational loss needs a train-mode encoding")
        kl_term = ad.kl_gaussian(latent.z_mu, latent.z_log_sigma)
    breakdown["kl"] = kl_term.item()

    total = ad.add(ad.add(ad.scale(ad.add(feat_term, edge_term),
                                   config.lambda_recon),
                          ad.scale(adv_term, config.lambda_adv)),
                   ad.scale(kl_term, config.lambda_kl))
    breakdown["total"] = total.item()
    return total, breakdown


# ---------------------------------------------------------------------------
# training

def _discriminator_loss(z_fake: Tensor, ckpt: Checkpoint,
                        prior_rng: np.random.Generator) -> Tensor:
    prior = Tensor(prior_rng.standard_normal(z_fake.shape))
    real_logits = discriminate(prior, ckpt)
    fake_logits = discriminate(z_fake, ckpt)
    loss_real = ad.weighted_bce_with_logits(real_logits,
                                            Tensor(np.ones(real_logits.shape)))
    loss_fake = ad.weighted_bce_with_logits(fake_logits,
                                            Tensor(np.zeros(fake_logits.shape)))
    return ad.scale(ad.add(loss_real, loss_fake), 0.5)


def train(corpus: list[GraphMatrices], config: ModelConfig
          ) -> tuple[Checkpoint, list[dict[str, float]]]:
    """Train on a corpus of preprocessed graphs, one gradient-accumulated
    optimizer step per batch, with the discriminator updated first on each
    batch by its own optimizer. Returns the checkpoint and a per-epoch log.

    Fully deterministic given config.seed: parameter init, sampling noise,
    prior draws, and epoch shuffling each use a named substream.
    """
    config.validate()
    if not corpus:
        raise ConfigError("empty training corpus")
    d = corpus[0].features.shape[1]
    for g in corpus:
        if g.features.shape[1] != d:
            raise ShapeError(f"{g.graph_id}: feature dim {g.features.shape[1]} "
                             f"differs from {d}")
    ckpt = init_model(config, d)
    noise_rng = substream(config.seed, "sampling")
    prior_rng = substream(config.seed, "prior")
    shuffle_rng = substream(config.seed, "shuffle")

    model_params = ckpt.model_params()
    disc_params = ckpt.disc_params()
    opt_kwargs = dict(lr=config.lr, beta1=config.beta1, beta2=config.beta2,
                      weight_decay=config.weight_decay)
    model_opt = ad.init_optimizer(model_params, **opt_kwargs)
    disc_opt = ad.init_optimizer(disc_params, **opt_kwargs)
    schedule = ad.LrSchedule(config.lr, config.lr_gamma)

    term_names = ("feature_recon", "edge_recon", "adversarial", "kl", "total")
    log: list[dict[str, float]] = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(corpus))
        sums = {name: 0.0 for name in term_names}
        disc_sum = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            inv = 1.0 / len(batch)
            try:
                latents = [encode(corpus[i], ckpt, "train", noise_rng)
                           for i in batch]
                if disc_params:
                    ad.zero_grad(disc_params)
                    for lat in latents:
                        d_loss = _discriminator_loss(lat.z_sample.detach(),
                                                     ckpt, prior_rng)
                        disc_sum += d_loss.item()
                        ad.backward(ad.scale(d_loss, inv))
                    ad.adamw_step(disc_opt, disc_params)
                ad.zero_grad(list(ckpt.params.values()))
                for i, lat in zip(batch, latents):
                    total, breakdown = compute_loss(corpus[i], lat, ckpt)
                    for name in term_names:
                        sums[name] += breakdown[name]
                    ad.backward(ad.scale(total, inv))
                ad.adamw_step(model_opt, model_params)
            except NumericsError as exc:
                raise NumericsError(
                    f"epoch {epoch}, batch starting at {start}: {exc}") from exc
        entry = {"epoch": float(epoch), "lr": schedule.lr}
        for name in term_names:
            entry[name] = sums[name] / len(corpus)
        entry["discriminator"] = (disc_sum / len(corpus)) if disc_params else 0.0
        log.append(entry)
        ad.lr_step(schedule, [model_opt, disc_opt])
    return ckpt, log


# ---------------------------------------------------------------------------
# inference (order-invariant path)

def _sorted_accumulate(rows: list[np.ndarray], width: int) -> np.ndarray:
    """Sum a multiset of equal-length rows in a content-determined order
    (sorted by byte representation), so the result does not depend on how the
    caller happened to index the rows."""
    if not rows:
        return np.zeros(width)
    ordered = sorted(rows, key=lambda r: r.tobytes())
    acc = ordered[0].copy()
    for r in ordered[1:]:
        acc = acc + r
    return acc


def _neighbor_lists(adj: np.ndarray) -> list[list[int]]:
    sym = symmetrized(adj)
    return [list(np.nonzero(sym[v])[0]) for v in range(adj.shape[0])]


def _infer_mu_rows(g: GraphMatrices, ckpt: Checkpoint) -> np.ndarray:
    """Mu-branch forward with order-invariant aggregation; returns (n, d_l)."""
    config = ckpt.config
    if g.features.shape[1] != config.feature_decoder_out:
        raise ShapeError(f"{g.graph_id}: feature dim {g.features.shape[1]} does "
                         f"not match the model ({config.feature_decoder_out})")
    n = g.n
    nbrs = _neighbor_lists(g.adjacency)
    if config.gnn_kind == "gcn":
        degrees = np.array([len(nb) for nb in nbrs], dtype=np.float64) + 1.0
        inv_sqrt = 1.0 / np.sqrt(degrees)
    h = g.features
    last = config.encoder_layers
    for i, prefix in enumerate(_encoder_prefixes(config, "mu"), start=1):
        act = i < last
        if config.gnn_kind == "gcn":
            m = h @ ckpt.params[f"{prefix}_W"].data
            out = np.empty((n, m.shape[1]))
            for v in range(n):
                terms = [(inv_sqrt[v] * inv_sqrt[u]) * m[u] for u in nbrs[v]]
                terms.append((inv_sqrt[v] * inv_sqrt[v]) * m[v])
                out[v] = _sorted_accumulate(terms, m.shape[1])
            out = out + ckpt.params[f"{prefix}_b"].data
        else:
            agg = np.empty_like(h)
            coef = 1.0 + config.gin_eps
            for v in range(n):
                neighbor_sum = _sorted_accumulate([h[u] for u in nbrs[v]],
                                                  h.shape[1])
                agg[v] = coef * h[v] + neighbor_sum
            out = agg @ ckpt.params[f"{prefix}_W1"].data
            out = out + ckpt.params[f"{prefix}_b1"].data
            out = np.maximum(out, 0.0)
            out = out @ ckpt.params[f"{prefix}_W2"].data
            out = out + ckpt.params[f"{prefix}_b2"].data
        if act:
            out = np.maximum(out, 0.0)
        h = out
        if not np.all(np.isfinite(h)):
            raise NumericsError(f"{g.graph_id}: non-finite encoder output")
    return h


def graph_embedding(g: GraphMatrices, ckpt: Checkpoint) -> np.ndarray:
    """Sum-pooled mu-branch embedding, shape (latent_dim,). Invariant to node
    permutation bit for bit (see module docstring)."""
    rows = _infer_mu_rows(g, ckpt)
    return _sorted_accumulate(list(rows), rows.shape[1])


def edge_reconstruction_accuracy(corpus: list[GraphMatrices],
                                 ckpt: Checkpoint) -> float:
    """Fraction of off-diagonal entries where the thresholded edge decoding
    (A_p > 0.5) matches the symmetrized adjacency, over all graphs."""
    correct = 0
    considered = 0
    for g in corpus:
        if g.n < 2:
            continue
        latent = encode(g, ckpt, "infer")
        a_p = decode_edges(latent.z_mu, ckpt).data
        a_sym = symmetrized(g.adjacency)
        off = ~np.eye(g.n, dtype=bool)
        correct += int(((a_p > 0.5) == (a_sym > 0.5))[off].sum())
        considered += int(off.sum())
    if considered == 0:
        raise ShapeError("no off-diagonal entries to score")
    return correct / considered


# ---------------------------------------------------------------------------
# serialization

CHECKPOINT_KIND = "checkpoint"


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    meta = {
        "config": asdict(ckpt.config),
        "param_order": list(ckpt.params.keys()),
    }
    arrays = {name: p.data for name, p in ckpt.params.items()}
    write_container(path, CHECKPOINT_KIND, arrays, meta)


def load_checkpoint(path) -> Checkpoint:
    header, arrays = read_container(path, expect_kind=CHECKPOINT_KIND)
    meta = header["meta"]
    config = ModelConfig(**meta["config"])
    config.validate()
    params: dict[str, Tensor] = {}
    for name in meta["param_order"]:
        params[name] = Tensor(arrays[name], requires_grad=True, name=name)
    return Checkpoint(config, params)

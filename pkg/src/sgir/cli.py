"""Command-line pipeline over file corpora.

Subcommands: preprocess, train, embed, ged, evaluate, counterfactual, ablate.
One JSON run configuration drives every stage and is echoed into each
artifact's manifest together with sha256 hashes of the inputs, so any stage
can refuse artifacts that were not produced from the same corpus and table.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .container import read_container, write_container
from .embeddings import (ClassEmbeddingTable, load_table, synth_table,
                         table_digest)
from .errors import (ConfigError, DataError, IntegrityError, NumericsError,
                     SgirError, UsageError)
from .ged import (allpairs_ged, build_cost_model, distance_matrix_csv,
                  load_distance_matrix, save_distance_matrix)
from .graphs import (GraphsFile, build_matrices, corpus_stats, load_graphs,
                     parse_corpus, preprocess_corpus, save_graphs)
from .metrics import counterfactual_evaluate, evaluate_run
from .model import (ModelConfig, graph_embedding, load_checkpoint,
                    save_checkpoint, train)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

EMBEDDINGS_KIND = "graph-embeddings"

CONFIG_SECTIONS = {"seed", "out_dir", "paths", "embeddings", "model", "ged",
                   "eval"}
PATH_KEYS = {"corpus", "graphs", "test_corpus", "test_graphs", "checkpoint",
             "embeddings", "ged_matrix", "table"}
GED_DEFAULTS = {"mode": "approx", "node_budget": 8, "edge_indel_cost": 1.0,
                "edge_sub_cost": 0.0, "workers": 1,
                "constant_indel_cost": None}
EVAL_DEFAULTS = {"ks": [1, 3, 5, 10], "golden_top_n": 50}


class _Parser(argparse.ArgumentParser):
    """argparse that reports problems as UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def load_config(path: str | Path) -> dict:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(doc) - CONFIG_SECTIONS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}; "
                          f"expected a subset of {sorted(CONFIG_SECTIONS)}")
    cfg = {
        "seed": doc.get("seed", 0),
        "out_dir": doc.get("out_dir", "out"),
        "paths": dict(doc.get("paths", {})),
        "embeddings": dict(doc.get("embeddings", {})),
        "model": dict(doc.get("model", {})),
        "ged": {**GED_DEFAULTS, **doc.get("ged", {})},
        "eval": {**EVAL_DEFAULTS, **doc.get("eval", {})},
    }
    if not isinstance(cfg["seed"], int):
        raise ConfigError("config.seed must be an integer")
    bad_paths = set(cfg["paths"]) - PATH_KEYS
    if bad_paths:
        raise ConfigError(f"unknown config.paths keys {sorted(bad_paths)}")
    bad_ged = set(cfg["ged"]) - set(GED_DEFAULTS)
    if bad_ged:
        raise ConfigError(f"unknown config.ged keys {sorted(bad_ged)}")
    bad_eval = set(cfg["eval"]) - set(EVAL_DEFAULTS)
    if bad_eval:
        raise ConfigError(f"unknown config.eval keys {sorted(bad_eval)}")
    return cfg


def resolve_table(cfg: dict) -> tuple[ClassEmbeddingTable, dict]:
    """Table from config: either a file path or a synthesis spec. Synthesis is
    a pure function of (root seed, counts, dim), so every stage that resolves
    the same config gets the identical table."""
    emb = cfg["embeddings"]
    path = emb.get("path") or cfg["paths"].get("table")
    if path:
        table = load_table(path)
        descriptor = {"source": "file", "path": str(path),
                      "sha256": _sha256(path)}
    elif "synth" in emb:
        spec = emb["synth"]
        required = {"n_object", "n_predicate", "dim"}
        if not isinstance(spec, dict) or set(spec) != required:
            raise ConfigError(f"embeddings.synth needs exactly the keys "
                              f"{sorted(required)}")
        table = synth_table(cfg["seed"], spec["n_object"], spec["n_predicate"],
                            spec["dim"])
        descriptor = {"source": "synth", "seed": cfg["seed"], **spec}
    else:
        raise ConfigError("config.embeddings must give either a table path or "
                          "a synth spec")
    descriptor["digest"] = table_digest(table)
    return table, descriptor


def _check_table_match(gf: GraphsFile, table: ClassEmbeddingTable,
                       graphs_path: str | Path) -> None:
    if gf.table_digest != table_digest(table):
        raise IntegrityError(
            f"{graphs_path} was preprocessed with a different embedding table "
            f"than this config resolves; re-run preprocess")


def model_config(cfg: dict, table: ClassEmbeddingTable) -> ModelConfig:
    fields = dict(cfg["model"])
    fields.setdefault("seed", cfg["seed"])
    fields.setdefault("feature_decoder_out", table.dim)
    try:
        mc = ModelConfig(**fields)
    except TypeError as exc:
        raise ConfigError(f"config.model: {exc}") from exc
    if mc.feature_decoder_out != table.dim:
        raise ConfigError(f"model.feature_decoder_out {mc.feature_decoder_out} "
                          f"must match the table dim {table.dim}")
    mc.validate()
    return mc


def write_manifest(artifact: str | Path, command: str, cfg: dict,
                   inputs: dict[str, str], outputs: dict[str, str]) -> Path:
    doc = {
        "tool_version": __version__,
        "command": command,
        "config": cfg,
        "inputs": inputs,
        "outputs": outputs,
    }
    path = Path(str(artifact) + ".manifest.json")
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return path


def _out_path(cfg: dict, flag_value: str | None, path_key: str,
              default_name: str) -> Path:
    if flag_value:
        return Path(flag_value)
    if cfg["paths"].get(path_key):
        return Path(cfg["paths"][path_key])
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def _in_path(cfg: dict, flag_value: str | None, path_key: str,
             what: str) -> Path:
    if flag_value:
        return Path(flag_value)
    if cfg["paths"].get(path_key):
        return Path(cfg["paths"][path_key])
    out_dir = Path(cfg["out_dir"])
    candidate = out_dir / _DEFAULT_NAMES[path_key]
    if candidate.exists():
        return candidate
    raise UsageError(f"no {what}: pass --{path_key.replace('_', '-')} or set "
                     f"paths.{path_key} in the config")


_DEFAULT_NAMES = {
    "corpus": "corpus.json",
    "graphs": "graphs.json",
    "test_corpus": "test_corpus.json",
    "test_graphs": "test_graphs.json",
    "checkpoint": "model.ckpt",
    "embeddings": "embeddings.bin",
    "ged_matrix": "ged_matrix.bin",
}


# ---------------------------------------------------------------------------
# commands

def cmd_preprocess(cfg: dict, args) -> None:
    corpus_path = _in_path(cfg, args.corpus, "corpus", "input corpus")
    out_path = _out_path(cfg, args.out, "graphs", _DEFAULT_NAMES["graphs"])
    table, table_desc = resolve_table(cfg)
    records = parse_corpus(corpus_path, vocabulary=set(table.class_names))
    graphs, dropped = preprocess_corpus(records, table)
    if not graphs:
        raise DataError(f"{corpus_path}: no graphs survived preprocessing")
    save_graphs(graphs, table, out_path)
    stats_path = Path(str(out_path) + ".stats.json")
    stats = corpus_stats(graphs, dropped)
    stats_path.write_text(json.dumps(stats, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")
    write_manifest(out_path, "preprocess", cfg,
                   inputs={"corpus": _sha256(corpus_path),
                           "table": table_desc["digest"]},
                   outputs={out_path.name: _sha256(out_path),
                            stats_path.name: _sha256(stats_path)})
    log.info("preprocessed %d graphs (%d dropped) -> %s",
             len(graphs), dropped, out_path)


def _load_corpus_matrices(graphs_path: Path, table: ClassEmbeddingTable):
    gf = load_graphs(graphs_path)
    _check_table_match(gf, table, graphs_path)
    return gf, [build_matrices(g, table) for g in gf.graphs]


def cmd_train(cfg: dict, args) -> None:
    graphs_path = _in_path(cfg, args.graphs, "graphs", "preprocessed graphs")
    ckpt_path = _out_path(cfg, args.checkpoint, "checkpoint",
                          _DEFAULT_NAMES["checkpoint"])
    table, table_desc = resolve_table(cfg)
    gf, matrices = _load_corpus_matrices(graphs_path, table)
    mc = model_config(cfg, table)
    log.info("training on %d graphs for %d epochs", len(matrices), mc.epochs)
    ckpt, loss_log = train(matrices, mc)
    save_checkpoint(ckpt, ckpt_path)
    loss_path = ckpt_path.with_suffix(".loss.csv")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["epoch", "term", "value"])
    for entry in loss_log:
        epoch = int(entry["epoch"])
        for term in ("feature_recon", "edge_recon", "adversarial", "kl",
                     "discriminator", "total", "lr"):
            writer.writerow([epoch, term, repr(entry[term])])
    loss_path.write_text(buf.getvalue(), encoding="utf-8")
    write_manifest(ckpt_path, "train", cfg,
                   inputs={"graphs": _sha256(graphs_path),
                           "table": table_desc["digest"]},
                   outputs={ckpt_path.name: _sha256(ckpt_path),
                            loss_path.name: _sha256(loss_path)})
    log.info("final epoch mean loss %.4f -> %s",
             loss_log[-1]["total"], ckpt_path)


def cmd_embed(cfg: dict, args) -> None:
    graphs_path = _in_path(cfg, args.graphs, "graphs", "preprocessed graphs")
    ckpt_path = _in_path(cfg, args.checkpoint, "checkpoint", "checkpoint")
    out_path = _out_path(cfg, args.out, "embeddings",
                         _DEFAULT_NAMES["embeddings"])
    table, table_desc = resolve_table(cfg)
    gf, matrices = _load_corpus_matrices(graphs_path, table)
    ckpt = load_checkpoint(ckpt_path)
    vectors = np.stack([graph_embedding(g, ckpt) for g in matrices])
    graphs_sha = _sha256(graphs_path)
    write_container(out_path, EMBEDDINGS_KIND, {"vectors": vectors},
                    meta={"graph_ids": [g.graph_id for g in gf.graphs],
                          "latent_dim": int(vectors.shape[1]),
                          "graphs_sha256": graphs_sha,
                          "table_digest": table_desc["digest"]})
    write_manifest(out_path, "embed", cfg,
                   inputs={"graphs": graphs_sha,
                           "checkpoint": _sha256(ckpt_path),
                           "table": table_desc["digest"]},
                   outputs={out_path.name: _sha256(out_path)})
    log.info("embedded %d graphs -> %s", len(matrices), out_path)


def cmd_ged(cfg: dict, args) -> None:
    graphs_path = _in_path(cfg, args.graphs, "graphs", "preprocessed graphs")
    out_path = _out_path(cfg, args.out, "ged_matrix",
                         _DEFAULT_NAMES["ged_matrix"])
    table, table_desc = resolve_table(cfg)
    gf = load_graphs(graphs_path)
    _check_table_match(gf, table, graphs_path)
    ged_cfg = dict(cfg["ged"])
    if args.mode:
        ged_cfg["mode"] = args.mode
    if args.workers:
        ged_cfg["workers"] = args.workers
    model = build_cost_model(table,
                             edge_indel_cost=ged_cfg["edge_indel_cost"],
                             edge_sub_cost=ged_cfg["edge_sub_cost"],
                             constant_indel_cost=ged_cfg["constant_indel_cost"])
    log.info("computing %s GED over %d graphs (%d pairs, %d workers)",
             ged_cfg["mode"], len(gf.graphs),
             len(gf.graphs) * (len(gf.graphs) - 1) // 2, ged_cfg["workers"])
    matrix = allpairs_ged(gf.graphs, model, mode=ged_cfg["mode"],
                          node_budget=ged_cfg["node_budget"],
                          workers=ged_cfg["workers"])
    graphs_sha = _sha256(graphs_path)
    ids = [g.graph_id for g in gf.graphs]
    save_distance_matrix(out_path, ids, matrix,
                         meta={"mode": ged_cfg["mode"],
                               "graphs_sha256": graphs_sha,
                               "table_digest": table_desc["digest"]})
    csv_path = out_path.with_suffix(".csv")
    csv_path.write_text(distance_matrix_csv(ids, matrix), encoding="utf-8")
    write_manifest(out_path, "ged", cfg,
                   inputs={"graphs": graphs_sha,
                           "table": table_desc["digest"]},
                   outputs={out_path.name: _sha256(out_path),
                            csv_path.name: _sha256(csv_path)})
    log.info("distance matrix -> %s", out_path)


def _load_embeddings(path: Path) -> tuple[list[str], np.ndarray, dict]:
    header, arrays = read_container(path, expect_kind=EMBEDDINGS_KIND)
    meta = header["meta"]
    return list(meta["graph_ids"]), arrays["vectors"], meta


def _check_same_corpus(emb_meta: dict, emb_ids: list[str],
                       mat_meta: dict, mat_ids: list[str]) -> None:
    if emb_ids != mat_ids:
        raise IntegrityError("embeddings and distance matrix list different "
                             "graphs; recompute one of them")
    emb_sha = emb_meta.get("graphs_sha256")
    mat_sha = mat_meta.get("graphs_sha256")
    if emb_sha and mat_sha and emb_sha != mat_sha:
        raise IntegrityError("embeddings and distance matrix were computed "
                             "from different preprocessed corpora")


def _write_report(report, out_dir: Path, stem: str, command: str, cfg: dict,
                  inputs: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{stem}.json"
    csv_path = out_dir / f"{stem}.csv"
    json_path.write_text(report.to_json(), encoding="utf-8")
    csv_path.write_text(report.to_csv(), encoding="utf-8")
    write_manifest(json_path, command, cfg, inputs,
                   outputs={json_path.name: _sha256(json_path),
                            csv_path.name: _sha256(csv_path)})
    for name, k, value in report.rows():
        print(f"{name}@{k}={value:.4f}" if k is not None
              else f"{name}={value:.4f}")


def cmd_evaluate(cfg: dict, args) -> None:
    emb_path = _in_path(cfg, args.embeddings, "embeddings", "graph embeddings")
    mat_path = _in_path(cfg, args.matrix, "ged_matrix", "distance matrix")
    ids, vectors, emb_meta = _load_embeddings(emb_path)
    mat_ids, matrix, mat_meta = load_distance_matrix(mat_path)
    _check_same_corpus(emb_meta, ids, mat_meta, mat_ids)
    report = evaluate_run(ids, vectors, matrix, ks=cfg["eval"]["ks"],
                          top_n=cfg["eval"]["golden_top_n"])
    _write_report(report, Path(cfg["out_dir"]), "report", "evaluate", cfg,
                  inputs={"embeddings": _sha256(emb_path),
                          "ged_matrix": _sha256(mat_path)})


def cmd_counterfactual(cfg: dict, args) -> None:
    emb_path = _in_path(cfg, args.embeddings, "embeddings", "graph embeddings")
    mat_path = _in_path(cfg, args.matrix, "ged_matrix", "distance matrix")
    graphs_path = _in_path(cfg, args.graphs, "graphs", "preprocessed graphs")
    ids, vectors, emb_meta = _load_embeddings(emb_path)
    mat_ids, matrix, mat_meta = load_distance_matrix(mat_path)
    _check_same_corpus(emb_meta, ids, mat_meta, mat_ids)
    graphs_sha = _sha256(graphs_path)
    for meta, what in ((emb_meta, "embeddings"), (mat_meta, "distance matrix")):
        if meta.get("graphs_sha256") and meta["graphs_sha256"] != graphs_sha:
            raise IntegrityError(f"{what} were not computed from "
                                 f"{graphs_path}")
    gf = load_graphs(graphs_path)
    by_id = {g.graph_id: g for g in gf.graphs}
    missing = [gid for gid in ids if gid not in by_id]
    if missing:
        raise IntegrityError(f"graph {missing[0]!r} missing from {graphs_path}")
    labels = [by_id[gid].scene_label for gid in ids]
    report = counterfactual_evaluate(ids, vectors, labels, matrix)
    _write_report(report, Path(cfg["out_dir"]), "counterfactual_report",
                  "counterfactual", cfg,
                  inputs={"embeddings": _sha256(emb_path),
                          "ged_matrix": _sha256(mat_path),
                          "graphs": graphs_sha})


def cmd_ablate(cfg: dict, args) -> None:
    grid_path = Path(args.grid)
    try:
        grid = json.loads(grid_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read grid {grid_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{grid_path}: invalid JSON: {exc}") from exc
    variants = grid.get("variants")
    seeds = grid.get("seeds", [cfg["seed"]])
    if (not isinstance(variants, list) or not variants
            or not all(isinstance(v, dict) and "name" in v for v in variants)):
        raise ConfigError(f"{grid_path}: variants must be a non-empty list of "
                          f"objects with name and overrides")
    if not isinstance(seeds, list) or not all(isinstance(s, int) for s in seeds):
        raise ConfigError(f"{grid_path}: seeds must be a list of integers")

    train_path = _in_path(cfg, args.train_graphs, "graphs", "training graphs")
    test_path = _in_path(cfg, args.test_graphs, "test_graphs", "test graphs")
    mat_path = _in_path(cfg, args.matrix, "ged_matrix", "distance matrix")
    table, table_desc = resolve_table(cfg)
    _, train_matrices = _load_corpus_matrices(train_path, table)
    test_gf, test_matrices = _load_corpus_matrices(test_path, table)
    mat_ids, matrix, mat_meta = load_distance_matrix(mat_path)
    test_ids = [g.graph_id for g in test_gf.graphs]
    if mat_ids != test_ids:
        raise IntegrityError("distance matrix does not cover the test graphs")

    rows: list[tuple[str, int, str, int | None, float]] = []
    for variant in variants:
        overrides = variant.get("overrides", {})
        if not isinstance(overrides, dict):
            raise ConfigError(f"variant {variant['name']!r}: overrides must "
                              f"be an object")
        for seed in seeds:
            run_cfg = dict(cfg)
            run_cfg["model"] = {**cfg["model"], **overrides}
            run_cfg["seed"] = seed
            mc = model_config(run_cfg, table)
            log.info("ablation %s seed %d", variant["name"], seed)
            ckpt, _ = train(train_matrices, mc)
            vectors = np.stack([graph_embedding(g, ckpt)
                                for g in test_matrices])
            report = evaluate_run(test_ids, vectors, matrix,
                                  ks=cfg["eval"]["ks"],
                                  top_n=cfg["eval"]["golden_top_n"])
            for name, k, value in report.rows():
                rows.append((variant["name"], seed, name, k, value))

    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "ablation.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["variant", "seed", "metric", "k", "value"])
    for variant_name, seed, name, k, value in rows:
        writer.writerow([variant_name, seed, name,
                         "" if k is None else k, repr(value)])
    out_path.write_text(buf.getvalue(), encoding="utf-8")
    write_manifest(out_path, "ablate", cfg,
                   inputs={"train_graphs": _sha256(train_path),
                           "test_graphs": _sha256(test_path),
                           "ged_matrix": _sha256(mat_path),
                           "grid": _sha256(grid_path),
                           "table": table_desc["digest"]},
                   outputs={out_path.name: _sha256(out_path)})
    log.info("ablation grid (%d runs) -> %s", len(variants) * len(seeds),
             out_path)


# ---------------------------------------------------------------------------
# argument wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="sgir", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument("--out-dir", help="override config out_dir")
        p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("preprocess", help="parse and lift a raw corpus")
    common(p)
    p.add_argument("--corpus", help="raw corpus JSON")
    p.add_argument("--out", help="preprocessed-graph file to write")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train the graph autoencoder")
    common(p)
    p.add_argument("--graphs", help="preprocessed-graph file")
    p.add_argument("--checkpoint", help="checkpoint file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("embed", help="embed preprocessed graphs")
    common(p)
    p.add_argument("--graphs", help="preprocessed-graph file")
    p.add_argument("--checkpoint", help="checkpoint file to read")
    p.add_argument("--out", help="embeddings file to write")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("ged", help="all-pairs graph edit distances")
    common(p)
    p.add_argument("--graphs", help="preprocessed-graph file")
    p.add_argument("--out", help="distance-matrix file to write")
    p.add_argument("--mode", choices=["approx", "exact"],
                   help="override config ged.mode")
    p.add_argument("--workers", type=int, help="parallel workers")
    p.set_defaults(func=cmd_ged)

    p = sub.add_parser("evaluate", help="ranked-retrieval metrics")
    common(p)
    p.add_argument("--embeddings", help="embeddings file")
    p.add_argument("--matrix", help="distance-matrix file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("counterfactual", help="counterfactual retrieval metrics")
    common(p)
    p.add_argument("--embeddings", help="embeddings file")
    p.add_argument("--matrix", help="distance-matrix file")
    p.add_argument("--graphs", help="preprocessed-graph file (scene labels)")
    p.set_defaults(func=cmd_counterfactual)

    p = sub.add_parser("ablate", help="run a variant grid end to end")
    common(p)
    p.add_argument("--grid", required=True, help="grid JSON (variants, seeds)")
    p.add_argument("--train-graphs", help="preprocessed training graphs")
    p.add_argument("--test-graphs", help="preprocessed test graphs")
    p.add_argument("--matrix", help="distance matrix over the test graphs")
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.out_dir:
            cfg["out_dir"] = args.out_dir
        args.func(cfg, args)
        return EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SgirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

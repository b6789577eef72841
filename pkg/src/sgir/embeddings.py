"""Class-embedding tables.

A table assigns one float64 vector to every object and predicate class name.
Row order defines the integer class ids used everywhere else: object classes
occupy rows ``0 .. object_class_count - 1``, predicate classes the rest.

File format (UTF-8 text, one record per line):

    dim=<d> classes=<k> objects=<m>
    <class_name> <v_0> <v_1> ... <v_{d-1}>     (k lines)

Vectors are written with ``repr`` so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, FormatError, ShapeError
from .rng import substream


@dataclass
class ClassEmbeddingTable:
    class_names: list[str]
    vectors: np.ndarray            # (k, d) float64
    object_class_count: int
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            raise ShapeError(f"table vectors must be 2-D, got {self.vectors.ndim}-D")
        k, d = self.vectors.shape
        if len(self.class_names) != k:
            raise ShapeError(f"{len(self.class_names)} names for {k} vector rows")
        if d < 1 or k < 1:
            raise ShapeError(f"table must be non-empty, got shape {(k, d)}")
        if not (0 < self.object_class_count <= k):
            raise ConfigError(
                f"object_class_count {self.object_class_count} outside 1..{k}")
        if not np.all(np.isfinite(self.vectors)):
            raise FormatError("table contains non-finite values")
        self._index = {}
        for i, name in enumerate(self.class_names):
            if not name or any(c.isspace() for c in name):
                raise FormatError(f"bad class name {name!r}")
            if name in self._index:
                raise FormatError(f"duplicate class name {name!r}")
            self._index[name] = i

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def class_count(self) -> int:
        return self.vectors.shape[0]

    def class_id(self, name: str) -> int | None:
        return self._index.get(name)

    def is_object_class(self, class_id: int) -> bool:
        return 0 <= class_id < self.object_class_count

    def vector(self, class_id: int) -> np.ndarray:
        return self.vectors[class_id]


def load_table(path: str | Path) -> ClassEmbeddingTable:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty table file")
    head = dict(part.split("=", 1) for part in lines[0].split() if "=" in part)
    try:
        d = int(head["dim"])
        k = int(head["classes"])
        m = int(head["objects"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"{path}: bad header line {lines[0]!r}") from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != k:
        raise FormatError(f"{path}: header declares {k} classes, found {len(body)} rows")
    names: list[str] = []
    rows = np.empty((k, d), dtype=np.float64)
    for i, line in enumerate(body):
        parts = line.split()
        if len(parts) != d + 1:
            raise FormatError(f"{path}: line {i + 2}: expected name + {d} values, "
                              f"got {len(parts)} fields")
        names.append(parts[0])
        try:
            rows[i] = [float(p) for p in parts[1:]]
        except ValueError as exc:
            raise FormatError(f"{path}: line {i + 2}: non-numeric value") from exc
    return ClassEmbeddingTable(names, rows, m)


def save_table(table: ClassEmbeddingTable, path: str | Path) -> None:
    out = [f"dim={table.dim} classes={table.class_count} "
           f"objects={table.object_class_count}"]
    for name, row in zip(table.class_names, table.vectors):
        out.append(name + " " + " ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def synth_table(seed: int, n_object: int, n_predicate: int, dim: int
                ) -> ClassEmbeddingTable:
    """Deterministic synthetic table: unit-norm rows from a counter-based
    generator keyed by (seed, "synth-table"), independent of platform."""
    if n_object < 1 or n_predicate < 0 or dim < 1:
        raise ConfigError(f"bad synth table sizes ({n_object}, {n_predicate}, {dim})")
    rng = substream(seed, "synth-table")
    k = n_object + n_predicate
    vecs = rng.standard_normal((k, dim))
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    # standard normal rows are never exactly zero, but guard the division anyway
    if np.any(norms == 0.0):
        raise ConfigError("synthetic table produced a zero row")
    vecs = vecs / norms
    names = [f"obj_{i:03d}" for i in range(n_object)]
    names += [f"pred_{i:03d}" for i in range(n_predicate)]
    return ClassEmbeddingTable(names, vecs, n_object)


def mean_embedding(table: ClassEmbeddingTable, objects_only: bool = True) -> np.ndarray:
    """Mean vector used as the anchor for node insert/delete costs. By default
    it averages only the object-class rows."""
    rows = table.vectors[:table.object_class_count] if objects_only else table.vectors
    return rows.mean(axis=0)


def table_digest(table: ClassEmbeddingTable) -> str:
    """Content hash tying downstream artifacts to the exact table (names,
    object split, and vector bits) they were computed with."""
    h = hashlib.sha256()
    h.update(f"{table.dim} {table.class_count} "
             f"{table.object_class_count}".encode())
    for name in table.class_names:
        h.update(name.encode("utf-8") + b"\x00")
    h.update(np.ascontiguousarray(table.vectors).tobytes())
    return h.hexdigest()

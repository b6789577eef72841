"""Versioned binary container for numeric artifacts.

Checkpoints, graph-embedding sets, and distance matrices all share one file
layout so that byte-for-byte reproducibility is easy to reason about:

    bytes 0..7    magic ``b"SGIRBIN1"``
    bytes 8..15   header length ``H`` as little-endian uint64
    next H bytes  UTF-8 JSON header (sorted keys, no whitespace)
    rest          the declared float64 blocks, little-endian, row-major,
                  concatenated in header order

The header carries ``kind``, ``format_version``, an ``arrays`` list of
``{"name": ..., "shape": [...]}`` entries, and a free-form ``meta`` object
(config echo and the like). Nothing in the file depends on write time or
platform, so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"SGIRBIN1"
FORMAT_VERSION = 1


def write_container(path: str | Path, kind: str, arrays: dict[str, np.ndarray],
                    meta: dict | None = None) -> None:
    entries = []
    blocks = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        blocks.append(arr.tobytes())
    header = {
        "kind": kind,
        "format_version": FORMAT_VERSION,
        "arrays": entries,
        "meta": meta if meta is not None else {},
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(head).to_bytes(8, "little"))
        fh.write(head)
        for block in blocks:
            fh.write(block)


def read_container(path: str | Path, expect_kind: str | None = None
                   ) -> tuple[dict, dict[str, np.ndarray]]:
    """Return (header, arrays). Raises FormatError on any structural problem."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:8] != MAGIC:
        raise FormatError(f"{path}: not a container file (bad magic)")
    head_len = int.from_bytes(raw[8:16], "little")
    if 16 + head_len > len(raw):
        raise FormatError(f"{path}: truncated header")
    try:
        header = json.loads(raw[16:16 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version "
                          f"{header.get('format_version')!r}")
    if expect_kind is not None and header.get("kind") != expect_kind:
        raise FormatError(f"{path}: kind is {header.get('kind')!r}, "
                          f"expected {expect_kind!r}")
    arrays: dict[str, np.ndarray] = {}
    offset = 16 + head_len
    for entry in header.get("arrays", []):
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated data block {entry['name']!r}")
        arr = np.frombuffer(raw[offset:offset + nbytes], dtype="<f8").reshape(shape)
        arrays[entry["name"]] = arr.copy()
        offset += nbytes
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes")
    return header, arrays

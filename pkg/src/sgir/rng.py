"""Seed plumbing.

All randomness in the toolkit flows from one root seed through named
substreams. A substream is a Philox (4x64) counter-based generator keyed by
the root seed and a stable hash of the stream name, so the draw sequence of
one stream never depends on how much another stream consumed, and results are
reproducible across platforms and process boundaries.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(name: str) -> int:
    """Stable 64-bit key for a substream name."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for the named substream of a root seed."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF, stream_key(name))
    return np.random.Generator(np.random.Philox(key=np.array(key, dtype=np.uint64)))

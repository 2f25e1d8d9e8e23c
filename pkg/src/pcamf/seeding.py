"""Deterministic random streams.

Every random draw in the package comes from a Philox generator whose key
combines a user seed with a domain tag, so streams for graph edges, initial
configurations and per-step updates never overlap.  Philox is counter based:
the i-th double drawn from a stream depends only on (key, i), which is what
makes edge sampling and node updates order independent.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1

TAG_EDGES = 1
TAG_INIT = 2
TAG_STEPS = 3
TAG_CHAIN = 4


def stream(seed: int, tag: int) -> np.random.Generator:
    """Return the generator for ``(seed, tag)``."""
    key = (int(seed) & MASK64) | ((int(tag) & MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(*parts) -> int:
    """Hash an arbitrary tuple of labels into a 64-bit seed.

    Floats are rendered with ``repr`` so 0.1 and 0.10000000000000002 differ.
    The encoding is stable across Python versions and platforms.
    """
    text = "|".join(repr(p) if isinstance(p, float) else str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")

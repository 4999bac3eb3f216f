"""Deterministic seed splitting.

Every randomized stage takes one 64-bit base seed; sub-seeds are derived by
hashing the base seed together with a component tag and integer indices.
The derivation is stable across platforms and runs, so work items scheduled
in any order (or concurrently) see the same randomness.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(base_seed: int, *tags: object) -> int:
    """A 64-bit seed determined by (base_seed, tags)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(base_seed)).encode())
    for tag in tags:
        h.update(b"\x1f")
        h.update(str(tag).encode())
    return int.from_bytes(h.digest(), "big")


def rng_for(base_seed: int, *tags: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(base_seed, *tags))

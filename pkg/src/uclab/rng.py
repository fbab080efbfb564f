"""Seeded counter-based random streams.

Every randomized call in the package takes an explicit ``numpy.random.Generator``.
Streams are Philox generators keyed by a master seed and a spawn path, so a
trial, a party or a key can derive its own independent substream.
"""
from __future__ import annotations

import hashlib

import numpy as np

Stream = np.random.Generator


def stream(seed: int, *path: int) -> Stream:
    """Return the Philox stream for ``seed`` at spawn ``path``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def substream(rng: Stream) -> Stream:
    """Draw a fresh child stream from ``rng`` (consumes one draw)."""
    return stream(int(rng.integers(0, 2**63 - 1)))


def hashed_seed(*parts: object) -> int:
    """Deterministic 64-bit seed from arbitrary printable parts."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")

"""Bitstrings as ``str`` of ``'0'``/``'1'``.

Strings are hashable, print well in reports and map directly onto hex
fixtures; the helpers below cover the few operations the schemes need.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np


def random_bits(rng: np.random.Generator, n: int) -> str:
    if n == 0:
        return ""
    # raw 64-bit words straight from the bit generator; much cheaper than Generator.bytes
    words = (n + 63) // 64
    raw = rng.bit_generator.random_raw(words)
    value = 0
    for w in raw.tolist():
        value = (value << 64) | w
    return format(value >> (64 * words - n), f"0{n}b")


def xor(a: str, b: str) -> str:
    if len(a) != len(b):
        raise ValueError(f"xor of strings with lengths {len(a)} and {len(b)}")
    if not a:
        return ""
    return format(int(a, 2) ^ int(b, 2), f"0{len(a)}b")


def parity(a: str) -> int:
    return a.count("1") & 1


def zeros(n: int) -> str:
    return "0" * n


def from_int(value: int, n: int) -> str:
    return format(value, f"0{n}b") if n else ""


def from_bytes(data: bytes, n: int) -> str:
    """First ``n`` bits of ``data``, most significant bit first."""
    if len(data) * 8 < n:
        raise ValueError("not enough bytes")
    if n == 0:
        return ""
    return format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")[:n]


def from_iter(bits: Iterable[int]) -> str:
    return "".join("1" if b else "0" for b in bits)


def to_hex(a: str) -> str:
    """Hex encoding with the bit length prefixed, e.g. ``'6:2c'``."""
    width = max(1, (len(a) + 3) // 4)
    return f"{len(a)}:" + (format(int(a, 2), f"0{width}x") if a else "0")


def from_hex(s: str) -> str:
    n, _, h = s.partition(":")
    return from_int(int(h, 16), int(n))


def all_strings(n: int) -> list[str]:
    return [from_int(v, n) for v in range(2**n)]

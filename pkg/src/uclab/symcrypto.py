"""Classical symmetric primitives: an ideal keyed function and nonce-based SKE.

The keyed function is an ideal random table: each output is drawn lazily
from a stream determined by ``(master seed, key, input)``. With an ideal
table the nonce scheme's ciphertexts are exactly uniform as long as nonces
do not collide, so its IND-CPA and pseudorandomness properties can be
checked by enumeration at toy sizes.
"""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bits
from .scheme import Scheme

PrfFn = Callable[[str, str, int], str]


def ideal_prf_bits(master_seed: int, key: str, x: str, n: int) -> str:
    """``n`` output bits of the ideal table entry ``(master_seed, key, x)``."""
    msg = b"uclab-prf\x00" + int(master_seed).to_bytes(8, "big", signed=False) + f"{key}|{x}".encode()
    nbytes = (n + 7) // 8
    value = int.from_bytes(hashlib.shake_256(msg).digest(nbytes), "big") >> (8 * nbytes - n)
    return format(value, f"0{n}b") if n else ""


@dataclass(frozen=True)
class SchemeParams:
    lam: int
    l_ek: int
    l_dk: int
    l_m: int
    l_ct: int
    l_r: int
    a: int = 1
    normal_form: bool = False

    def __post_init__(self):
        for name in ("lam", "l_ek", "l_dk", "l_m", "l_ct", "l_r", "a"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.normal_form and self.l_ek != self.l_dk:
            raise ValueError("normal-form schemes need l_ek == l_dk")


@dataclass
class PrfInstance:
    key: str
    in_len: int
    out_len: int
    master_seed: int = 0
    table: dict[str, str] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)


def prf_eval(prf: PrfInstance, x: str) -> str:
    if len(x) != prf.in_len:
        raise ValueError(f"PRF input has length {len(x)}, expected {prf.in_len}")
    with prf._lock:
        out = prf.table.get(x)
        if out is None:
            out = ideal_prf_bits(prf.master_seed, prf.key, x, prf.out_len)
            prf.table[x] = out
    return out


@dataclass(frozen=True)
class ClassicalCiphertext:
    nonce: str
    body: str

    @property
    def bits(self) -> str:
        return self.nonce + self.body

    def __len__(self) -> int:
        return len(self.nonce) + len(self.body)

    @classmethod
    def parse(cls, s: str, lam: int) -> "ClassicalCiphertext":
        return cls(s[:lam], s[lam:])

    def to_hex(self) -> str:
        return bits.to_hex(self.bits)


class NonceSke(Scheme):
    """``Enc(k, m) = (r, F_k(r) xor m)`` with a fresh ``lam``-bit nonce ``r``.

    ``l_m=None`` accepts messages of any length (used for garbled rows).
    ``prf`` is the adapter slot for a concrete keyed function.
    """

    name = "nonce-ske"
    normal_form = True

    def __init__(self, lam: int = 32, l_m: int | None = 8, *, master_seed: int = 0,
                 prf: PrfFn | None = None, pseudorandom: bool = False):
        if lam < 1:
            raise ValueError("lam must be >= 1")
        self.lam = lam
        self.l_m = l_m
        self.message_length = l_m if l_m is not None else 0
        self.master_seed = master_seed
        self.pseudorandom = pseudorandom
        self._prf = prf or (lambda k, x, n: ideal_prf_bits(master_seed, k, x, n))

    @property
    def params(self) -> SchemeParams:
        l_m = self.l_m or 1
        return SchemeParams(self.lam, self.lam, self.lam, l_m, self.lam + l_m, self.lam, normal_form=True)

    @property
    def ct_length(self) -> int:
        if self.l_m is None:
            raise ValueError("variable-length scheme has no fixed ciphertext length")
        return self.lam + self.l_m

    def gen(self, rng):
        k = bits.random_bits(rng, self.lam)
        return k, k

    def check_message(self, m):
        if self.l_m is not None:
            super().check_message(m)

    def enc(self, ek, m, rng):
        self.check_message(m)
        if len(ek) != self.lam:
            raise ValueError(f"key has length {len(ek)}, expected {self.lam}")
        r = bits.random_bits(rng, self.lam)
        return ClassicalCiphertext(r, bits.xor(self._prf(ek, r, len(m)), m))

    def enc_bits(self, ek: str, m: str, rng) -> str:
        """Unchecked fast path returning ``nonce || body`` as one string."""
        r = bits.random_bits(rng, self.lam)
        return r + bits.xor(self._prf(ek, r, len(m)), m)

    def dec_bits(self, dk: str, ct: str) -> str:
        body = ct[self.lam:]
        return bits.xor(self._prf(dk, ct[: self.lam], len(body)), body)

    def dec(self, dk, ct, rng=None):
        if isinstance(ct, str):
            ct = ClassicalCiphertext.parse(ct, self.lam)
        if len(ct.nonce) != self.lam:
            raise ValueError(f"nonce has length {len(ct.nonce)}, expected {self.lam}")
        if self.l_m is not None and len(ct.body) != self.l_m:
            raise ValueError(f"ciphertext body has length {len(ct.body)}, expected {self.l_m}")
        return bits.xor(self._prf(dk, ct.nonce, len(ct.body)), ct.body)

    def describe(self):
        return {**super().describe(), "lambda": self.lam, "pseudorandom": self.pseudorandom}


def ske_gen(ske: NonceSke, rng) -> str:
    return ske.gen(rng)[0]


def ske_enc(ske: NonceSke, key: str, m: str, rng) -> ClassicalCiphertext:
    return ske.enc(key, m, rng)


def ske_dec(ske: NonceSke, key: str, ct: ClassicalCiphertext) -> str:
    return ske.dec(key, ct)


def ske_pseudorandom_variant(lam: int = 32, l_m: int | None = 8, **kw) -> NonceSke:
    """The same nonce scheme, declared normal form and pseudorandom."""
    ske = NonceSke(lam, l_m, pseudorandom=True, **kw)
    ske.name = "nonce-ske-pr"
    return ske


class PerfectCorrectness(Scheme):
    """Turn an imperfectly-correct classical scheme into a perfectly correct one.

    Enc checks the produced ciphertext and falls back to sending the message
    in the clear when it does not decrypt correctly.
    """

    def __init__(self, inner: Scheme):
        self.inner = inner
        self.name = f"perfect({inner.name})"
        self.message_length = inner.message_length
        self.normal_form = inner.normal_form

    def gen(self, rng):
        return self.inner.gen(rng)

    def enc(self, ek, m, rng, *, dk=None):
        ct = self.inner.enc(ek, m, rng)
        check_key = ek if dk is None else dk
        if self.inner.dec(check_key, ct, None) == m:
            return ("ct", ct)
        return ("clear", m)

    def dec(self, dk, ct, rng=None):
        tag, payload = ct
        return payload if tag == "clear" else self.inner.dec(dk, payload, rng)


def collision_free(nonces: list[str]) -> bool:
    return len(set(nonces)) == len(nonces)


def collision_bound(q: int, lam: int) -> float:
    """Birthday bound ``q^2 / 2^lam`` on a nonce collision among ``q`` queries."""
    return q * q / 2.0**lam

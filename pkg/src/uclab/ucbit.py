"""One-bit uncloneable encryption candidates.

``ConjugateCodingBit`` hides the bit in the parity of a string ``x`` encoded
in hidden bases: the ciphertext is ``H^theta |x>`` with ``x`` uniform subject
to ``parity(x) = b xor parity(s)``. Its uncloneability is conjectural.
``ClassicalControlBit`` is the same scheme with every basis fixed to the
computational one, so its ciphertexts are classical and trivially copyable;
it serves as the negative control for the cloning harness.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bits
from .qstate import (
    H,
    DensityMatrix,
    PureState,
    RegisterLayout,
    State,
    apply,
    measure_computational,
    outcome_probabilities,
)
from .scheme import PureScheme

MAX_QUBITS = 6


@dataclass(frozen=True)
class UcbitKey:
    theta: str
    s: str

    def __post_init__(self):
        if len(self.theta) != len(self.s):
            raise ValueError("theta and s must have equal length")

    @property
    def n(self) -> int:
        return len(self.s)


def ct_names(n: int) -> list[str]:
    return [f"c{i}" for i in range(n)]


def _hadamard_layer(state: State, theta: str, names: list[str]) -> State:
    for i, t in enumerate(theta):
        if t == "1":
            state = apply(H, state, [names[i]])
    return state


class ConjugateCodingBit(PureScheme):
    name = "bb84-ucbit"
    message_length = 1
    normal_form = True
    controlled_gates = ("I", "H")

    def __init__(self, n: int = 4):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"n must be in [1, {MAX_QUBITS}]")
        self.n = n
        self.names = ct_names(n)
        self.layout = RegisterLayout.qubits(*self.names)

    # key handling -----------------------------------------------------------

    def gen(self, rng):
        key = UcbitKey(bits.random_bits(rng, self.n), bits.random_bits(rng, self.n))
        return key, key

    def key_bits(self, key: UcbitKey) -> str:
        """``dk`` as a bitstring (``theta || s``)."""
        return key.theta + key.s

    def key_from_bits(self, kb: str) -> UcbitKey:
        if len(kb) != self.key_length:
            raise ValueError(f"key string has length {len(kb)}, expected {self.key_length}")
        return UcbitKey(kb[: self.n], kb[self.n:])

    @property
    def key_length(self) -> int:
        return 2 * self.n

    def decoder_layout(self) -> tuple[list[int], list[tuple[str, str]], list[int]]:
        """Classical structure of Dec for the randomized-encoding compiler.

        Returns, per ciphertext qubit, the key-bit index controlling its gate
        slot and the (bit=0, bit=1) gate pair, plus the key-bit indices of
        the parity pad.
        """
        controls = list(range(self.n))
        gates = [self.controlled_gates] * self.n
        pads = list(range(self.n, 2 * self.n))
        return controls, gates, pads

    # encryption -------------------------------------------------------------

    def sample_randomness(self, rng) -> str:
        return bits.random_bits(rng, self.n - 1)

    def admissible(self, key: UcbitKey, m: str) -> list[str]:
        target = int(m) ^ bits.parity(key.s)
        return [x for x in bits.all_strings(self.n) if bits.parity(x) == target]

    def string_for(self, key: UcbitKey, m: str, r: str) -> str:
        """The string ``x`` selected by randomness ``r`` (last bit fixes parity)."""
        self.check_message(m)
        if len(r) != self.n - 1:
            raise ValueError(f"randomness must have {self.n - 1} bits")
        last = int(m) ^ bits.parity(key.s) ^ bits.parity(r)
        return r + str(last)

    def enc_with(self, key: UcbitKey, m: str, r: str) -> PureState:
        x = self.string_for(key, m, r)
        return _hadamard_layer(PureState.basis(self.layout, x), key.theta, self.names)

    def channel(self, key: UcbitKey, m: str) -> DensityMatrix:
        """The mixed-state ciphertext: uniform mixture over admissible ``x``."""
        self.check_message(m)
        xs = self.admissible(key, m)
        rho = np.zeros((self.layout.dim, self.layout.dim), dtype=complex)
        for x in xs:
            rho[int(x, 2), int(x, 2)] += 1.0 / len(xs)
        return _hadamard_layer(DensityMatrix.unchecked(self.layout, rho), key.theta, self.names)

    def pure_encoder(self, key: UcbitKey, m: str, purifier_prefix: str = "r") -> PureState:
        """``sum_x H^theta|x>_A |x>_B`` over admissible ``x`` (A = ciphertext, B = randomness)."""
        self.check_message(m)
        xs = self.admissible(key, m)
        pnames = [f"{purifier_prefix}{i}" for i in range(self.n)]
        layout = RegisterLayout.qubits(*self.names, *pnames)
        v = np.zeros(layout.dim, dtype=complex)
        for x in xs:
            v[int(x + x, 2)] = 1.0 / np.sqrt(len(xs))
        return _hadamard_layer(PureState.unchecked(layout, v), key.theta, self.names)

    # decryption -------------------------------------------------------------

    def _rotated(self, key: UcbitKey, ct: State) -> State:
        if ct.layout.dims != self.layout.dims:
            raise ValueError(f"ciphertext has register dims {ct.layout.dims}, expected {self.layout.dims}")
        names = list(ct.layout.names)
        return _hadamard_layer(ct, key.theta, names), names

    def dec(self, key, ct, rng=None):
        if rng is None:
            dist = self.dec_distribution(key, ct)
            return max(dist, key=dist.get)
        rotated, names = self._rotated(key, ct)
        outcome, _ = measure_computational(rotated, names, rng)
        return str(bits.parity(outcome) ^ bits.parity(key.s))

    def dec_distribution(self, key, ct):
        rotated, names = self._rotated(key, ct)
        probs = outcome_probabilities(rotated, names)
        out = {"0": 0.0, "1": 0.0}
        pad = bits.parity(key.s)
        for o, p in enumerate(probs):
            out[str(bits.parity(bits.from_int(o, self.n)) ^ pad)] += float(p)
        return out

    def describe(self):
        return {**super().describe(), "n": self.n}


class ClassicalControlBit(ConjugateCodingBit):
    """Computational-basis-only variant: ``Enc`` outputs a classical string."""

    name = "classical-control"
    controlled_gates = ("I", "I")

    def __init__(self, n: int = 1):
        super().__init__(n)

    def gen(self, rng):
        key = UcbitKey(bits.zeros(self.n), bits.random_bits(rng, self.n))
        return key, key

    def key_bits(self, key):
        return key.s

    def key_from_bits(self, kb):
        if len(kb) != self.key_length:
            raise ValueError(f"key string has length {len(kb)}, expected {self.key_length}")
        return UcbitKey(bits.zeros(self.n), kb)

    @property
    def key_length(self):
        return self.n

    def decoder_layout(self):
        # gate slots are identity; control them by the pad bits
        controls = list(range(self.n))
        return controls, [self.controlled_gates] * self.n, list(range(self.n))


def ucbit_gen(n: int, rng) -> UcbitKey:
    return ConjugateCodingBit(n).gen(rng)[0]


def ucbit_enc(key: UcbitKey, b: int, rng) -> PureState:
    return ConjugateCodingBit(key.n).enc(key, str(b), rng)


def ucbit_dec(key: UcbitKey, ct: State, rng=None) -> int:
    return int(ConjugateCodingBit(key.n).dec(key, ct, rng))


def classical_control_scheme(n: int = 1) -> ClassicalControlBit:
    return ClassicalControlBit(n)

"""Compilers built on a one-bit uncloneable scheme.

* ``ExpandedScheme``: ``ell_m``-bit messages. Encryption garbles the circuit
  that always outputs ``m`` and hides the classical-key labels in a
  ``ell x 2`` grid of SKE ciphertexts; only the entries selected by the
  one-bit key are real labels.
* ``NormalFormScheme``: same, with one SKE key per index (``ek = dk``) and
  uniformly random strings in the unselected grid slots.
* ``IdcopyScheme``: purifies a base encryption and scrambles the purifying
  register with a keyed unitary, so identical copies look like copies of a
  fresh purification.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import bits
from .dqre import (
    DqreBundle,
    EncodedCircuit,
    PaddedTeleportDqre,
    TransparentDqre,
    input_names,
    ucbit_constant_circuit,
)
from .qstate import (
    DensityMatrix,
    PureState,
    RegisterLayout,
    State,
    UnitaryOp,
    apply,
    haar_unitary,
    partial_trace,
    reorder,
)
from .rng import hashed_seed, stream
from .scheme import ConfigError, PureScheme, Scheme
from .symcrypto import NonceSke, ske_pseudorandom_variant
from .ucbit import ClassicalControlBit, ConjugateCodingBit


# ---------------------------------------------------------------------------
# garbled compilers


@dataclass(frozen=True)
class ExpandedEk:
    grid_keys: tuple[tuple[str, str], ...]
    dk1: Any


@dataclass(frozen=True)
class ExpandedDk:
    re_keys: tuple[str, ...]
    dk1: Any

    def components(self) -> tuple:
        return (*self.re_keys, self.dk1)


@dataclass(frozen=True)
class ExpandedKeyPair:
    ek: ExpandedEk
    dk: ExpandedDk


@dataclass(frozen=True)
class NormalFormKey:
    re_keys: tuple[str, ...]
    dk1: Any

    def components(self) -> tuple:
        return (*self.re_keys, self.dk1)


@dataclass(frozen=True, eq=False)
class ExpandedCiphertext:
    chat: EncodedCircuit
    qlabels: State
    grid: tuple[tuple[str, str], ...]

    def quantum_objects(self) -> list:
        objs = [self.qlabels]
        if isinstance(self.chat, EncodedCircuit):
            objs += self.chat.quantum_objects()
        return objs


class _GarbledCompiler(Scheme):
    """Shared machinery for the expanded and normal-form constructions."""

    def __init__(self, base, ske: NonceSke, message_length: int = 2, dqre=None):
        if message_length < 1:
            raise ConfigError("message_length: must be >= 1")
        self.base = base
        self.ske = ske
        self.message_length = message_length
        self.dqre = dqre if dqre is not None else PaddedTeleportDqre(16)
        self.ell = base.key_length
        self.lq = base.n
        label_len = self.label_length
        if ske.l_m is not None and ske.l_m != label_len:
            raise ConfigError(f"ske: message length {ske.l_m} does not match DQRE label length {label_len}")

    @property
    def label_length(self) -> int:
        return self.dqre.lam + 1 if isinstance(self.dqre, PaddedTeleportDqre) else 1

    @property
    def grid_ct_length(self) -> int:
        return self.ske.lam + self.label_length

    def constant_circuit(self, m: str):
        return ucbit_constant_circuit(self.base, m)

    def dk1_bits(self, dk1) -> str:
        return self.base.key_bits(dk1)

    def encode(self, C, qstate: State, rng) -> tuple[DqreBundle, State]:
        """Encode ``C`` and label the qubits of ``qstate`` (registers ``q0..``)."""
        bundle = self.dqre.encode(C, rng)
        for i, name in enumerate(input_names(C.lq)):
            qstate = self.dqre.label_q(i, qstate, bundle.r, None, name)
        return bundle, qstate

    def zero_input(self) -> PureState:
        return PureState.qubits("0" * self.lq, input_names(self.lq))

    def recover_labels(self, re_keys, dk1, grid) -> list[str]:
        kb = self.dk1_bits(dk1)
        if len(grid) != self.ell or len(re_keys) != self.ell:
            raise ValueError(f"expected {self.ell} grid rows and keys")
        return [self.ske.dec(re_keys[i], grid[i][int(kb[i])]) for i in range(self.ell)]

    def _dec_components(self, dk) -> tuple[tuple[str, ...], Any]:
        return dk.re_keys, dk.dk1

    def evaluate(self, dk, ct: ExpandedCiphertext, rng=None):
        re_keys, dk1 = self._dec_components(dk)
        labels = self.recover_labels(re_keys, dk1, ct.grid)
        return self.dqre.eval(ct.chat, ct.qlabels, labels, rng, input_names(self.lq))

    def dec(self, dk, ct, rng=None):
        if rng is not None:
            return self.evaluate(dk, ct, rng)
        dist = self.dec_distribution(dk, ct)
        return max(dist, key=dist.get)

    def dec_distribution(self, dk, ct):
        return self.evaluate(dk, ct, None).probabilities()

    def describe(self):
        return {**super().describe(), "base": self.base.describe(), "ske": self.ske.describe(),
                "dqre": self.dqre.name, "ell": self.ell}


class ExpandedScheme(_GarbledCompiler):
    name = "expand"
    normal_form = False

    def gen(self, rng):
        dk1 = self.base.gen(rng)[1]
        kb = self.dk1_bits(dk1)
        grid = tuple((self.ske.gen(rng)[0], self.ske.gen(rng)[0]) for _ in range(self.ell))
        ek = ExpandedEk(grid, dk1)
        dk = ExpandedDk(tuple(grid[i][int(kb[i])] for i in range(self.ell)), dk1)
        return ek, dk

    def enc(self, ek: ExpandedEk, m: str, rng, *, fill: str = "zeros"):
        self.check_message(m)
        bundle, qlabels = self.encode(self.constant_circuit(m), self.zero_input(), rng)
        kb = self.dk1_bits(ek.dk1)
        grid = []
        for i in range(self.ell):
            row = ["", ""]
            for b in (0, 1):
                lab = self.dqre.label_c(i, b, bundle.r)
                if b != int(kb[i]) and fill == "zeros":
                    lab = bits.zeros(len(lab))
                row[b] = self.ske.enc(ek.grid_keys[i][b], lab, rng).bits
            grid.append(tuple(row))
        return ExpandedCiphertext(bundle.circuit, qlabels, tuple(grid))


class NormalFormScheme(_GarbledCompiler):
    name = "nf"
    normal_form = True

    def __init__(self, base, ske: NonceSke, message_length: int = 2, dqre=None):
        if not (getattr(ske, "normal_form", False) and getattr(ske, "pseudorandom", False)):
            raise ConfigError("ske: normal-form compiler needs a normal-form pseudorandom SKE")
        super().__init__(base, ske, message_length, dqre)

    def gen(self, rng):
        dk1 = self.base.gen(rng)[1]
        sk = NormalFormKey(tuple(self.ske.gen(rng)[0] for _ in range(self.ell)), dk1)
        return sk, sk

    def enc(self, sk: NormalFormKey, m: str, rng):
        self.check_message(m)
        bundle, qlabels = self.encode(self.constant_circuit(m), self.zero_input(), rng)
        kb = self.dk1_bits(sk.dk1)
        grid = []
        for i in range(self.ell):
            row = ["", ""]
            sel = int(kb[i])
            row[sel] = self.ske.enc(sk.re_keys[i], self.dqre.label_c(i, sel, bundle.r), rng).bits
            row[1 - sel] = bits.random_bits(rng, self.grid_ct_length)
            grid.append(tuple(row))
        return ExpandedCiphertext(bundle.circuit, qlabels, tuple(grid))


def expand_gen(scheme: ExpandedScheme, rng) -> ExpandedKeyPair:
    return ExpandedKeyPair(*scheme.gen(rng))


def expand_enc(scheme: ExpandedScheme, ek: ExpandedEk, m: str, rng) -> ExpandedCiphertext:
    return scheme.enc(ek, m, rng)


def expand_dec(scheme: ExpandedScheme, dk: ExpandedDk, ct: ExpandedCiphertext, rng=None) -> str:
    return scheme.dec(dk, ct, rng)


def nf_gen(scheme: NormalFormScheme, rng) -> NormalFormKey:
    return scheme.gen(rng)[0]


def nf_enc(scheme: NormalFormScheme, sk: NormalFormKey, m: str, rng) -> ExpandedCiphertext:
    return scheme.enc(sk, m, rng)


def nf_dec(scheme: NormalFormScheme, sk: NormalFormKey, ct: ExpandedCiphertext, rng=None) -> str:
    return scheme.dec(sk, ct, rng)


# ---------------------------------------------------------------------------
# keyed unitaries

PRU_MODES = ("ideal", "brickwork", "identity")


@dataclass
class PruFamily:
    """Keyed unitaries on ``qubits`` qubits.

    ``ideal`` draws a Haar unitary per key from a stream keyed by
    ``(seed, k)`` and caches it; ``brickwork`` builds layers of seeded
    two-qubit Haar gates; ``identity`` is a test control.
    """

    qubits: int
    key_length: int = 16
    mode: str = "ideal"
    depth: int | None = None
    seed: int = 0
    _cache: dict[str, UnitaryOp] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.mode not in PRU_MODES:
            raise ConfigError(f"pru.mode: unknown mode {self.mode!r}; expected one of {PRU_MODES}")
        if self.qubits < 1:
            raise ConfigError("pru: needs at least one qubit")
        if self.depth is None:
            self.depth = 2 * self.qubits

    @property
    def dim(self) -> int:
        return 2**self.qubits

    def sample_key(self, rng) -> str:
        return bits.random_bits(rng, self.key_length)

    def unitary(self, k: str) -> UnitaryOp:
        if len(k) != self.key_length or set(k) - {"0", "1"}:
            raise ValueError(f"PRU key must be a {self.key_length}-bit string")
        with self._lock:
            U = self._cache.get(k)
        if U is not None:
            return U
        rng = stream(hashed_seed("pru", self.seed, self.mode, k))
        if self.mode == "identity":
            U = UnitaryOp.unchecked(np.eye(self.dim))
        elif self.mode == "ideal":
            U = haar_unitary(self.dim, rng)
        else:
            U = self._brickwork(rng)
        with self._lock:
            U = self._cache.setdefault(k, U)
        return U

    def _brickwork(self, rng) -> UnitaryOp:
        n = self.qubits
        names = [f"w{i}" for i in range(n)]
        layout = RegisterLayout.qubits(*names)
        M = np.eye(self.dim, dtype=complex)
        for layer in range(self.depth):
            if n == 1:
                M = haar_unitary(2, rng).matrix @ M
                continue
            for i in range(layer % 2, n - 1, 2):
                g = haar_unitary(4, rng).matrix
                cols = [apply(g, PureState.unchecked(layout, M[:, j]), [names[i], names[i + 1]]).vector
                        for j in range(self.dim)]
                M = np.stack(cols, axis=1)
        return UnitaryOp.unchecked(M)


def pru_apply(family: PruFamily, k: str, state: State, targets) -> State:
    targets = list(targets)
    if 2 ** len(targets) != family.dim or any(state.layout.dim_of(t) != 2 for t in targets):
        raise ValueError(f"PRU acts on {family.qubits} qubits, targets {targets} do not match")
    return apply(family.unitary(k), state, targets)


# ---------------------------------------------------------------------------
# identical-copy compiler


@dataclass(frozen=True)
class PureEncoder:
    """Declared register split of a purified base encryption."""

    a_registers: tuple[str, ...]
    b_registers: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class SeededPureCiphertext:
    """Symbolic pure ciphertext for bases whose randomness is classical.

    Stands for ``sum_r |psi_r>_A (x) U_k |r>_B`` with ``psi_r`` the base
    encryption run on the ``seed_bits``-bit seed ``r``. ``A`` alone is the
    uniform mixture over ``r``, which is all that decryption reads.
    """

    ek: Any
    m: str
    k: str
    seed_bits: int

    def marginal_sample(self, base: Scheme, rng):
        r = int(rng.integers(0, 2**self.seed_bits))
        return base.enc(self.ek, self.m, stream(hashed_seed("idcopy-seed", r)))


class IdcopyScheme(PureScheme):
    name = "idcopy"

    def __init__(self, base: Scheme, pru: PruFamily | None = None, *, pru_mode: str = "ideal",
                 seed_bits: int = 6, key_length: int = 16):
        self.base = base
        self.message_length = base.message_length
        self.normal_form = base.normal_form
        self.dense = isinstance(base, ConjugateCodingBit)
        if self.dense:
            self.encoder = PureEncoder(tuple(base.names), tuple(f"r{i}" for i in range(base.n)))
            b_qubits = base.n
        else:
            self.encoder = PureEncoder(("A",), tuple(f"s{i}" for i in range(seed_bits)))
            b_qubits = seed_bits
        self.seed_bits = seed_bits
        self.pru = pru if pru is not None else PruFamily(b_qubits, key_length, pru_mode)
        if self.pru.qubits != b_qubits:
            raise ConfigError(f"pru: dimension 2^{self.pru.qubits} does not match B register 2^{b_qubits}")

    def gen(self, rng):
        return self.base.gen(rng)

    def sample_randomness(self, rng) -> str:
        return self.pru.sample_key(rng)

    def enc_with(self, ek, m, k):
        self.check_message(m)
        if not self.dense:
            return SeededPureCiphertext(ek, m, k, self.seed_bits)
        phi = self.base.pure_encoder(ek, m, purifier_prefix="r")
        return pru_apply(self.pru, k, phi, self.encoder.b_registers)

    def _marginal(self, ct, rng=None):
        if isinstance(ct, SeededPureCiphertext):
            if self.dense:
                raise ValueError("layout mismatch: dense scheme received a seeded ciphertext")
            return ct.marginal_sample(self.base, rng if rng is not None else stream(0))
        if self.dense and isinstance(ct, (PureState, DensityMatrix)):
            expected = set(self.encoder.a_registers) | set(self.encoder.b_registers)
            if set(ct.layout.names) != expected:
                raise ValueError(f"layout mismatch: got {ct.layout.names}, expected {sorted(expected)}")
            rho_a = partial_trace(ct, self.encoder.a_registers)
            return reorder(rho_a, list(self.encoder.a_registers))
        raise ValueError(f"layout mismatch: cannot decrypt {type(ct).__name__}")

    def dec(self, dk, ct, rng=None):
        return self.base.dec(dk, self._marginal(ct, rng), rng)

    def dec_distribution(self, dk, ct):
        if isinstance(ct, SeededPureCiphertext):
            # average the base's exact distribution over every seed value
            acc: dict[str, float] = {}
            for r in range(2**ct.seed_bits):
                inner = self.base.enc(ct.ek, ct.m, stream(hashed_seed("idcopy-seed", r)))
                for y, p in self.base.dec_distribution(dk, inner).items():
                    acc[y] = acc.get(y, 0.0) + p / 2**ct.seed_bits
            return acc
        return self.base.dec_distribution(dk, self._marginal(ct))

    def describe(self):
        return {**super().describe(), "base": self.base.describe(), "pru_mode": self.pru.mode,
                "representation": "dense" if self.dense else "seeded"}


def idcopy_enc(scheme: IdcopyScheme, ek, m: str, k: str):
    return scheme.enc_with(ek, m, k)


def idcopy_dec(scheme: IdcopyScheme, dk, rho_ab, rng=None) -> str:
    return scheme.dec(dk, rho_ab, rng)


# ---------------------------------------------------------------------------
# scheme stacks from JSON configs

DEFAULT_STACK = {
    "ucbit": {"kind": "bb84", "n": 2},
    "ske": {"lambda": 16},
    "dqre": {"lambda": 16, "kind": "padded-teleport"},
    "compiler": "expand",
    "idcopy_base": "ucbit",
    "pru": {"mode": "ideal", "depth": None, "key_length": 16},
    "message_length": 2,
}


def _merged(cfg: dict | None) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULT_STACK.items()}
    for k, v in (cfg or {}).items():
        if k not in DEFAULT_STACK and k != "corrupt_keys":
            raise ConfigError(f"{k}: unknown scheme-stack field")
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k].update(v)
        else:
            out[k] = v
    return out


def _positive_int(value, field_name: str, lo: int = 1, hi: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < lo or (hi is not None and value > hi):
        rng_desc = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
        raise ConfigError(f"{field_name}: expected an integer in {rng_desc}, got {value!r}")
    return value


def build_ucbit(cfg: dict):
    kind = cfg.get("kind", "bb84")
    n = _positive_int(cfg.get("n", 2), "ucbit.n", 1, 4)
    if kind == "bb84":
        return ConjugateCodingBit(n)
    if kind == "classical":
        return ClassicalControlBit(n)
    raise ConfigError(f"ucbit.kind: unknown kind {kind!r}")


def build_stack(cfg: dict | None = None) -> dict[str, Scheme]:
    """Every layer of the configured stack, bottom-up, keyed by layer name."""
    c = _merged(cfg)
    ucb = build_ucbit(c["ucbit"])
    ske_lam = _positive_int(c["ske"].get("lambda", 16), "ske.lambda", 4, 64)
    dq_lam = _positive_int(c["dqre"].get("lambda", 16), "dqre.lambda", 4, 64)
    ml = _positive_int(c["message_length"], "message_length", 1, 4)
    dq_kind = c["dqre"].get("kind", "padded-teleport")
    if dq_kind == "padded-teleport":
        dq = PaddedTeleportDqre(dq_lam)
    elif dq_kind == "transparent":
        dq = TransparentDqre()
    else:
        raise ConfigError(f"dqre.kind: unknown kind {dq_kind!r}")
    label_len = dq_lam + 1 if dq_kind == "padded-teleport" else 1
    plain_ske = NonceSke(ske_lam, label_len)
    pr_ske = ske_pseudorandom_variant(ske_lam, label_len)
    layers: dict[str, Scheme] = {"ucbit": ucb, "ske": NonceSke(ske_lam, 8)}
    compiler = c["compiler"]
    pru_cfg = c["pru"]
    mode = pru_cfg.get("mode", "ideal")
    if mode not in PRU_MODES:
        raise ConfigError(f"pru.mode: unknown mode {mode!r}; expected one of {PRU_MODES}")
    if compiler in ("expand", "nf", "idcopy"):
        layers["expand"] = ExpandedScheme(ucb, plain_ske, ml, dq)
    if compiler in ("nf", "idcopy"):
        layers["nf"] = NormalFormScheme(ucb, pr_ske, ml, dq)
    if compiler == "idcopy":
        base_name = c["idcopy_base"]
        if base_name not in layers:
            raise ConfigError(f"idcopy_base: unknown layer {base_name!r}")
        base = layers[base_name]
        b_qubits = base.n if isinstance(base, ConjugateCodingBit) else 6
        pru = PruFamily(b_qubits, _positive_int(pru_cfg.get("key_length", 16), "pru.key_length", 4, 64), mode,
                        pru_cfg.get("depth"))
        layers["idcopy"] = IdcopyScheme(base, pru)
    elif compiler not in ("expand", "nf", "none"):
        raise ConfigError(f"compiler: unknown compiler {compiler!r}")
    return layers


def stack_config(cfg: dict | None = None) -> dict:
    """The fully defaulted stack configuration."""
    return _merged(cfg)

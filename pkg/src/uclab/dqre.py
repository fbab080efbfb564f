"""Decomposable quantum randomized encoding for classically controlled Clifford circuits.

Circuit class (``HybridCircuit``): each input qubit ``i`` passes through one
single-qubit Clifford chosen from a pair ``(G_i0, G_i1)`` by a classical input
bit, then every qubit is measured and a boolean circuit ``f`` maps
``(outcomes, classical inputs)`` to the output.

Encoding. Every qubit gets two teleportation resources ``(I x G_ic)|Phi>``,
one per control value, each half padded with an independent Pauli. The two
resources sit at positions ``c xor pi_i``. A garbled boolean circuit ``F``
reveals ``p_i = c xor pi_i`` (which resource to use), then takes the Bell
outcomes and measurement results on open wires, strips every Pauli pad
(commuting it through the selected Clifford) and outputs ``f``. The input
qubit itself is padded with ``X^a Z^b``; that is the whole quantum label.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from . import bits
from .garble import (
    BoolCircuit,
    CircuitBuilder,
    GarbledCircuit,
    Gate,
    WireLabels,
    decode,
    dre_garble,
    eval_partial,
)
from .qstate import (
    CNOT,
    GATES,
    H,
    DensityMatrix,
    PureState,
    RegisterLayout,
    State,
    apply,
    bell_state,
    measure_computational,
    measurement_branches,
    pauli,
    tensor,
)
from .rng import stream

CLIFFORDS = ("I", "X", "Y", "Z", "H", "S")


class DqreError(ValueError):
    pass


class CircuitClassError(DqreError):
    """Circuit is outside the supported classically-controlled Clifford class."""


class DqrePreconditionError(DqreError):
    """The two circuits compared by an indistinguishability check differ on their inputs."""


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class HybridCircuit:
    lq: int
    lc: int
    controls: tuple[int, ...]
    gates: tuple[tuple[str, str], ...]
    f: BoolCircuit
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        object.__setattr__(self, "gates", tuple(tuple(g) for g in self.gates))
        if self.lq < 1 or self.lc < 1:
            raise CircuitClassError("need at least one qubit and one classical input")
        if len(self.controls) != self.lq or len(self.gates) != self.lq:
            raise CircuitClassError("one control index and one gate pair per qubit")
        for c in self.controls:
            if not 0 <= c < self.lc:
                raise CircuitClassError(f"control index {c} out of range for lc={self.lc}")
        for pair in self.gates:
            if len(pair) != 2 or any(g not in CLIFFORDS for g in pair):
                raise CircuitClassError(f"gate pair {pair} not drawn from {CLIFFORDS}")
        if self.f.n_inputs != self.lq + self.lc:
            raise CircuitClassError(f"f takes {self.f.n_inputs} inputs, expected lq + lc = {self.lq + self.lc}")

    @property
    def n_outputs(self) -> int:
        return len(self.f.outputs)

    @property
    def size(self) -> tuple:
        """Public shape; gate choices and constants are not part of it."""
        return (self.lq, self.lc, self.controls, self.f.skeleton())

    def gate_for(self, i: int, x_c: str) -> str:
        return self.gates[i][int(x_c[self.controls[i]])]

    def to_json(self) -> dict:
        return {"name": self.name, "lq": self.lq, "lc": self.lc, "controls": list(self.controls),
                "gates": [list(g) for g in self.gates], "f": self.f.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "HybridCircuit":
        return cls(d["lq"], d["lc"], tuple(d["controls"]), tuple(tuple(g) for g in d["gates"]),
                   BoolCircuit.from_json(d["f"]), d.get("name", ""))


def input_names(lq: int) -> list[str]:
    return [f"q{i}" for i in range(lq)]


def decode_circuit(controls: Sequence[int], gates: Sequence[tuple[str, str]], pads: Sequence[int],
                   lc: int, m0: str, m1: str, name: str = "") -> HybridCircuit:
    """Measure, take ``parity(outcomes) xor parity(pad bits)`` as ``b``, output ``m_b``.

    Both messages enter as constant gates, so every instance with the same
    controls, pads and message length has the same shape.
    """
    if len(m0) != len(m1) or not m0:
        raise ValueError("messages must be non-empty and of equal length")
    lq = len(controls)
    B = CircuitBuilder(lq + lc)
    sel = B.xor_all(list(range(lq)) + [lq + p for p in pads])
    outs = []
    for j in range(len(m0)):
        k0, k1 = B.const(int(m0[j])), B.const(int(m1[j]))
        outs.append(B.mux(sel, k0, k1))
    return HybridCircuit(lq, lc, tuple(controls), tuple(gates), B.build(outs), name)


def ucbit_decode_circuit(scheme, m0: str, m1: str) -> HybridCircuit:
    """``D[m0, m1]``: decrypt a one-bit ciphertext with the classical key input, output ``m_b``."""
    controls, gates, pads = scheme.decoder_layout()
    return decode_circuit(controls, gates, pads, scheme.key_length, m0, m1, f"D[{m0},{m1}]")


def ucbit_constant_circuit(scheme, m: str) -> HybridCircuit:
    """``C[m]``: same shape as ``D[m, m]`` with identity gate slots."""
    controls, _, pads = scheme.decoder_layout()
    gates = [("I", "I")] * len(controls)
    return decode_circuit(controls, gates, pads, scheme.key_length, m, m, f"C[{m}]")


def canonical_corpus() -> list[HybridCircuit]:
    """Fixed set of test circuits, including ``C[m]`` and ``D[m0, m1]`` over the two-qubit ucbit."""
    from .ucbit import ClassicalControlBit, ConjugateCodingBit

    out = []
    B = CircuitBuilder(2)
    out.append(HybridCircuit(1, 1, (0,), (("I", "I"),), B.build([0]), "pass-through"))
    out.append(HybridCircuit(1, 1, (0,), (("I", "H"),), B.build([0]), "controlled-H"))
    B = CircuitBuilder(4)
    w = B.xor(0, 1)
    out.append(HybridCircuit(2, 2, (0, 1), (("H", "S"), ("X", "Y")), B.build([w, 2]), "clifford-mix"))
    B = CircuitBuilder(4)
    w = B.and_(B.not_(0), 1)
    out.append(HybridCircuit(2, 2, (1, 1), (("Z", "H"), ("S", "I")), B.build([w, B.xor(w, 3)]), "shared-control"))
    bb84, cc = ConjugateCodingBit(2), ClassicalControlBit(1)
    for m0, m1 in (("01", "10"), ("00", "11")):
        out.append(ucbit_decode_circuit(bb84, m0, m1))
    out.append(ucbit_constant_circuit(bb84, "01"))
    out.append(ucbit_decode_circuit(cc, "01", "10"))
    out.append(ucbit_constant_circuit(cc, "10"))
    return out


def load_corpus() -> list[HybridCircuit]:
    from . import data_path

    doc = json.loads(data_path("circuit_corpus.json").read_text())
    return [HybridCircuit.from_json(d) for d in doc["circuits"]]


# ---------------------------------------------------------------------------
# classical-quantum outputs


@dataclass(frozen=True, eq=False)
class CqState:
    """``sum_y |y><y| (x) rho_y`` with unnormalized blocks on the leftover registers."""

    blocks: dict[str, np.ndarray]
    layout: RegisterLayout

    def probabilities(self) -> dict[str, float]:
        return {y: float(np.real(np.trace(b))) for y, b in sorted(self.blocks.items())}

    def distance(self, other: "CqState") -> float:
        if self.layout.registers != other.layout.registers:
            raise ValueError(f"layout mismatch: {self.layout.names} vs {other.layout.names}")
        total = 0.0
        zero = np.zeros((self.layout.dim, self.layout.dim), dtype=complex)
        for y in set(self.blocks) | set(other.blocks):
            d = self.blocks.get(y, zero) - other.blocks.get(y, zero)
            total += np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2)).sum()
        return 0.5 * float(total)


class _CqAccumulator:
    def __init__(self):
        self.blocks: dict[str, np.ndarray] = {}
        self.layout: RegisterLayout | None = None

    def add(self, y: str, weight: float, post: State | None):
        if post is None:
            layout, block = RegisterLayout(()), np.array([[weight]], dtype=complex)
        else:
            layout, block = post.layout, weight * post.density().matrix
        if self.layout is None:
            self.layout = layout
        elif layout.registers != self.layout.registers:
            raise DqreError("branches left different registers")
        self.blocks[y] = self.blocks.get(y, 0) + block

    def result(self) -> CqState:
        return CqState(self.blocks, self.layout or RegisterLayout(()))


def _check_inputs(state: State, names: Sequence[str], x_c: str, C: HybridCircuit):
    if len(names) != C.lq:
        raise DqreError(f"circuit takes {C.lq} qubits, got registers {list(names)}")
    if len(x_c) != C.lc:
        raise DqreError(f"circuit takes {C.lc} classical bits, got {len(x_c)}")
    for n in names:
        if state.layout.dim_of(n) != 2:
            raise DqreError(f"input register {n!r} is not a qubit")


def direct_eval(C: HybridCircuit, state: State, x_c: str, inputs: Sequence[str] | None = None,
                rng: np.random.Generator | None = None) -> CqState | str:
    """Run ``C`` directly: exact cq-output without ``rng``, a sampled output string with it."""
    names = list(inputs) if inputs is not None else input_names(C.lq)
    _check_inputs(state, names, x_c, C)
    for i, n in enumerate(names):
        state = apply(GATES[C.gate_for(i, x_c)], state, [n])
    if rng is not None:
        outcome, _ = measure_computational(state, names, rng, discard=True)
        return C.f.evaluate(outcome + x_c)
    acc = _CqAccumulator()
    for outcome, p, post in measurement_branches(state, names, discard=True):
        acc.add(C.f.evaluate(outcome + x_c), p, post)
    return acc.result()


# ---------------------------------------------------------------------------
# Pauli bookkeeping


def _pauli_exponents(M: np.ndarray) -> tuple[int, int]:
    """``(a, b)`` with ``M`` proportional to ``X^a Z^b``."""
    for a in (0, 1):
        for b in (0, 1):
            if abs(abs(np.trace(pauli(a, b).matrix.conj().T @ M)) - 2) < 1e-9:
                return a, b
    raise DqreError("operator is not a Pauli")


@lru_cache(maxsize=None)
def conjugation_x_coefficients(gate: str) -> tuple[int, int]:
    """X-exponents of ``G X G^dag`` and ``G Z G^dag``; X-part of ``G X^x Z^z G^dag`` is their GF(2) combination."""
    G = GATES[gate].matrix
    gx = _pauli_exponents(G @ pauli(1, 0).matrix @ G.conj().T)[0]
    gz = _pauli_exponents(G @ pauli(0, 1).matrix @ G.conj().T)[0]
    return gx, gz


# ---------------------------------------------------------------------------
# encoding


@dataclass(frozen=True)
class BranchKeys:
    a1: int
    b1: int
    a2: int
    b2: int
    gate: str


@dataclass(frozen=True)
class QubitKeys:
    a: int
    b: int
    perm: int
    branches: tuple[BranchKeys, BranchKeys]


@dataclass(frozen=True, eq=False)
class DqreRandomness:
    """Classical randomness ``r``: classical-input labels and every Pauli/branch key."""

    labels: dict[int, tuple[str, str]]
    qubits: tuple[QubitKeys, ...]


@dataclass(frozen=True)
class FWiring:
    lc: int
    lq: int

    def c_wire(self, j: int) -> int:
        return j

    def open_wires(self, i: int) -> tuple[int, int, int]:
        base = self.lc + 3 * i
        return base, base + 1, base + 2

    @property
    def n_inputs(self) -> int:
        return self.lc + 3 * self.lq


@dataclass(frozen=True, eq=False)
class EncodedCircuit:
    """``C-hat``: garbled ``F`` plus the padded teleportation resources."""

    garbled: GarbledCircuit
    resources: tuple[tuple[PureState, PureState], ...]
    wiring: FWiring
    p_wires: tuple[int, ...]
    size: tuple

    @property
    def lq(self) -> int:
        return self.wiring.lq

    @property
    def lc(self) -> int:
        return self.wiring.lc

    def quantum_objects(self) -> list[PureState]:
        return [s for pair in self.resources for s in pair]


@dataclass(frozen=True, eq=False)
class DqreBundle:
    circuit: EncodedCircuit
    r: DqreRandomness
    sigma: tuple = ()


def resource_names(i: int, pos: int) -> tuple[str, str]:
    return f"R{i}p{pos}a", f"R{i}p{pos}b"


def _resource(keys: BranchKeys, names: tuple[str, str], phase: complex = 1.0) -> PureState:
    st = apply(GATES[keys.gate], bell_state(names), [names[1]])
    st = apply(pauli(keys.a1, keys.b1), st, [names[0]])
    st = apply(pauli(keys.a2, keys.b2), st, [names[1]])
    return PureState.unchecked(st.layout, phase * st.vector)


def prepare_resources(r: DqreRandomness, rng: np.random.Generator | None = None
                      ) -> tuple[tuple[PureState, PureState], ...]:
    """Resource states derived from ``r``; ``rng`` only draws unobservable global phases."""
    out = []
    for i, qk in enumerate(r.qubits):
        pair: list[PureState | None] = [None, None]
        for c in (0, 1):
            pos = c ^ qk.perm
            phase = np.exp(2j * np.pi * rng.random()) if rng is not None else 1.0
            pair[pos] = _resource(qk.branches[c], resource_names(i, pos), phase)
        out.append(tuple(pair))
    return tuple(out)


def _build_F(C: HybridCircuit, keys: Sequence[QubitKeys]) -> tuple[BoolCircuit, list[int]]:
    wiring = FWiring(C.lc, C.lq)
    B = CircuitBuilder(wiring.n_inputs)
    xs, ps = [], []
    for i, qk in enumerate(keys):
        c = wiring.c_wire(C.controls[i])
        m1, m2, y = wiring.open_wires(i)
        ps.append(B.xor(c, B.const(qk.perm)))
        a, b = B.const(qk.a), B.const(qk.b)
        coeff = [conjugation_x_coefficients(br.gate) for br in qk.branches]

        def sel(values):
            return B.mux(c, B.const(values[0]), B.const(values[1]))

        A1 = sel([br.a1 for br in qk.branches])
        B1 = sel([br.b1 for br in qk.branches])
        A2 = sel([br.a2 for br in qk.branches])
        GX = sel([cf[0] for cf in coeff])
        GZ = sel([cf[1] for cf in coeff])
        qx = B.xor(B.xor(a, A1), m2)
        qz = B.xor(B.xor(b, B1), m1)
        alpha = B.xor(B.and_(GX, qx), B.and_(GZ, qz))
        xs.append(B.xor(B.xor(y, A2), alpha))
    remap = xs + [wiring.c_wire(j) for j in range(C.lc)]
    for g in C.f.gates:
        remap.append(B._add(Gate(g.kind, tuple(remap[w] for w in g.inputs), g.value)))
    return B.build(remap[w] for w in C.f.outputs), ps


def _bit(rng) -> int:
    return int(rng.integers(0, 2))


class PaddedTeleportDqre:
    """The restricted DQRE described in the module docstring."""

    name = "padded-teleport"

    def __init__(self, lam: int = 16, master_seed: int = 0):
        self.lam = lam
        self.master_seed = master_seed

    def encode(self, C: HybridCircuit, rng: np.random.Generator) -> DqreBundle:
        if not isinstance(C, HybridCircuit):
            raise CircuitClassError(f"expected a HybridCircuit, got {type(C).__name__}")
        keys = []
        for i in range(C.lq):
            branches = tuple(BranchKeys(_bit(rng), _bit(rng), _bit(rng), _bit(rng), C.gates[i][c]) for c in (0, 1))
            keys.append(QubitKeys(_bit(rng), _bit(rng), _bit(rng), branches))
        F, ps = _build_F(C, keys)
        wiring = FWiring(C.lc, C.lq)
        opens = [w for i in range(C.lq) for w in wiring.open_wires(i)]
        gc, wl = dre_garble(F, self.lam, rng, open_inputs=opens, reveal=ps, master_seed=self.master_seed)
        r = DqreRandomness({j: wl.labels[wiring.c_wire(j)] for j in range(C.lc)}, tuple(keys))
        chat = EncodedCircuit(gc, prepare_resources(r), wiring, tuple(ps), C.size)
        return DqreBundle(chat, r)

    def label_q(self, i: int, state: State, r: DqreRandomness, sigma_Ri=None, register: str | None = None) -> State:
        """Pad the qubit ``register`` (default ``q{i}``) with ``X^a Z^b``; nothing else is touched."""
        if sigma_Ri not in (None, ()):
            raise DqreError("this instantiation has an empty resource state")
        qk = r.qubits[i]
        return apply(pauli(qk.a, qk.b), state, [register or f"q{i}"])

    def label_c(self, i: int, x_i: int | str, r: DqreRandomness) -> str:
        return r.labels[i][int(x_i)]

    # evaluation ---------------------------------------------------------

    def _branch_labels(self, chat: EncodedCircuit, c_labels: Sequence[str]) -> tuple[dict[int, str], str]:
        if len(c_labels) != chat.lc:
            raise DqreError(f"expected {chat.lc} classical labels, got {len(c_labels)}")
        known = eval_partial(chat.garbled, {chat.wiring.c_wire(j): lab for j, lab in enumerate(c_labels)})
        return known, decode(chat.garbled, known, chat.p_wires)

    def _finish(self, chat: EncodedCircuit, known: dict[int, str], open_bits: str) -> str:
        known = dict(known)
        for i in range(chat.lq):
            for w, v in zip(chat.wiring.open_wires(i), open_bits[3 * i: 3 * i + 3]):
                known[w] = chat.garbled.open_labels[w][int(v)]
        known = eval_partial(chat.garbled, known)
        return decode(chat.garbled, known, chat.garbled.outputs)

    @staticmethod
    def _teleport_in(state: State, resource: PureState, q: str) -> tuple[State, list[str]]:
        res = resource if isinstance(state, PureState) else resource.density()
        ra, rb = resource.layout.names
        st = tensor(state, res)
        st = apply(CNOT, st, [q, ra])
        st = apply(H, st, [q])
        return st, [q, ra, rb]

    def eval(self, chat: EncodedCircuit, state: State, c_labels: Sequence[str],
             rng: np.random.Generator | None = None, inputs: Sequence[str] | None = None) -> CqState | str:
        """Evaluate ``C-hat`` on padded qubits ``inputs`` (default ``q0..``) and classical labels.

        Exact mode (no ``rng``) returns the cq-state over every measurement
        branch; registers not consumed by the circuit remain in the blocks.
        """
        names = list(inputs) if inputs is not None else input_names(chat.lq)
        if len(names) != chat.lq:
            raise DqreError(f"expected {chat.lq} quantum inputs, got {len(names)}")
        known, p = self._branch_labels(chat, c_labels)
        if rng is not None:
            opened = []
            for i, q in enumerate(names):
                st, targets = self._teleport_in(state, chat.resources[i][int(p[i])], q)
                outcome, state = measure_computational(st, targets, rng, discard=True)
                opened.append(outcome)
            return self._finish(chat, known, "".join(opened))
        acc = _CqAccumulator()
        memo: dict[str, str] = {}

        def walk(i: int, st: State | None, weight: float, opened: str):
            if i == chat.lq:
                if opened not in memo:
                    memo[opened] = self._finish(chat, known, opened)
                acc.add(memo[opened], weight, st)
                return
            joint, targets = self._teleport_in(st, chat.resources[i][int(p[i])], names[i])
            for outcome, prob, post in measurement_branches(joint, targets, discard=True):
                walk(i + 1, post, weight * prob, opened + outcome)

        walk(0, state, 1.0, "")
        return acc.result()


class TransparentDqre:
    """Plumbing control: labels are the inputs themselves and ``C-hat`` is ``C``."""

    name = "transparent"

    def encode(self, C: HybridCircuit, rng=None) -> DqreBundle:
        return DqreBundle(C, None)

    def label_q(self, i, state, r, sigma_Ri=None, register=None):
        return state

    def label_c(self, i, x_i, r):
        return str(int(x_i))

    def eval(self, chat: HybridCircuit, state, c_labels, rng=None, inputs=None):
        return direct_eval(chat, state, "".join(c_labels), inputs, rng)


DEFAULT = PaddedTeleportDqre()


def dqre_encode(C: HybridCircuit, lam: int, rng: np.random.Generator, master_seed: int = 0) -> DqreBundle:
    return PaddedTeleportDqre(lam, master_seed).encode(C, rng)


def dqre_label_q(i: int, state: State, r: DqreRandomness, sigma_Ri=None, register: str | None = None) -> State:
    return DEFAULT.label_q(i, state, r, sigma_Ri, register)


def dqre_label_c(i: int, x_i: int | str, r: DqreRandomness) -> str:
    return DEFAULT.label_c(i, x_i, r)


def dqre_eval(chat: EncodedCircuit, state: State, c_labels: Sequence[str],
              rng: np.random.Generator | None = None, inputs: Sequence[str] | None = None):
    return DEFAULT.eval(chat, state, c_labels, rng, inputs)


def resample_resources(bundle: DqreBundle, rng: np.random.Generator) -> DqreBundle:
    """Re-prepare the quantum part of ``C-hat`` from ``r`` with fresh preparation randomness."""
    chat = bundle.circuit
    fresh = EncodedCircuit(chat.garbled, prepare_resources(bundle.r, rng), chat.wiring, chat.p_wires, chat.size)
    return DqreBundle(fresh, bundle.r, ())


def label_inputs(dqre, bundle: DqreBundle, state: State, x_c: str, inputs: Sequence[str] | None = None
                 ) -> tuple[State, list[str]]:
    """Apply every quantum and classical labeling function."""
    lq = len(inputs) if inputs is not None else bundle.circuit.lq
    names = list(inputs) if inputs is not None else input_names(lq)
    for i, n in enumerate(names):
        state = dqre.label_q(i, state, bundle.r, None, n)
    return state, [dqre.label_c(j, x, bundle.r) for j, x in enumerate(x_c)]


# ---------------------------------------------------------------------------
# serialization


def bundle_to_json(bundle: DqreBundle) -> str:
    """Classical data only; resources are re-derived from ``r``."""
    chat, gc = bundle.circuit, bundle.circuit.garbled
    payload = {
        "lam": gc.lam,
        "master_seed": gc.master_seed,
        "skeleton": _jsonable(gc.skeleton),
        "tables": {str(w): list(rows) for w, rows in gc.tables.items()},
        "const_labels": {str(w): v for w, v in gc.const_labels.items()},
        "output_perm": {str(w): v for w, v in gc.output_perm.items()},
        "open_labels": {str(w): list(v) for w, v in gc.open_labels.items()},
        "wiring": [chat.wiring.lc, chat.wiring.lq],
        "p_wires": list(chat.p_wires),
        "size": _jsonable(chat.size),
        "r": {
            "labels": {str(j): list(v) for j, v in bundle.r.labels.items()},
            "qubits": [{"a": q.a, "b": q.b, "perm": q.perm,
                        "branches": [vars(br) for br in q.branches]} for q in bundle.r.qubits],
        },
    }
    return json.dumps(payload, sort_keys=True)


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def bundle_from_json(s: str) -> DqreBundle:
    d = json.loads(s)
    r = DqreRandomness(
        {int(j): tuple(v) for j, v in d["r"]["labels"].items()},
        tuple(QubitKeys(q["a"], q["b"], q["perm"], tuple(BranchKeys(**br) for br in q["branches"]))
              for q in d["r"]["qubits"]),
    )
    gc = GarbledCircuit(
        skeleton=_tuplify(d["skeleton"]),
        lam=d["lam"],
        tables={int(w): tuple(rows) for w, rows in d["tables"].items()},
        const_labels={int(w): v for w, v in d["const_labels"].items()},
        output_perm={int(w): v for w, v in d["output_perm"].items()},
        open_labels={int(w): tuple(v) for w, v in d["open_labels"].items()},
        master_seed=d["master_seed"],
    )
    chat = EncodedCircuit(gc, prepare_resources(r), FWiring(*d["wiring"]), tuple(d["p_wires"]), _tuplify(d["size"]))
    return DqreBundle(chat, r)


# ---------------------------------------------------------------------------
# indistinguishability battery


@dataclass(frozen=True)
class DqreInput:
    """A circuit input: joint state holding ``inputs`` (plus any side registers) and classical bits."""

    state: State
    x_c: str
    inputs: tuple[str, ...] | None = None


Distinguisher = Callable[[EncodedCircuit, State, list[str], tuple[str, ...], np.random.Generator], int]


def _measure_bit(state: State, reg: str, rng, basis: str = "Z") -> int:
    if basis == "X":
        state = apply(H, state, [reg])
    return int(measure_computational(state, [reg], rng)[0])


def _d_output(chat, state, labels, names, rng):
    return int(DEFAULT.eval(chat, state, labels, rng, names)[0])


def _d_branch_pointer(chat, state, labels, names, rng):
    _, p = DEFAULT._branch_labels(chat, labels)
    return int(p[0])


def _d_resource_z(chat, state, labels, names, rng):
    return _measure_bit(chat.resources[0][0], chat.resources[0][0].layout.names[1], rng)


def _d_resource_x(chat, state, labels, names, rng):
    return _measure_bit(chat.resources[0][1], chat.resources[0][1].layout.names[0], rng, "X")


def _d_label_z(chat, state, labels, names, rng):
    return _measure_bit(state, names[0], rng)


def _d_label_x(chat, state, labels, names, rng):
    return _measure_bit(state, names[0], rng, "X")


def _d_label_pointer(chat, state, labels, names, rng):
    return int(labels[0][-1])


def _d_row_bit(chat, state, labels, names, rng):
    first = min(chat.garbled.tables)
    return int(chat.garbled.tables[first][0][chat.garbled.lam])


def _d_resource_swap(chat, state, labels, names, rng):
    """Swap test between the ``b`` halves of the two resources of qubit 0 (1 = antisymmetric)."""
    r0, r1 = chat.resources[0]
    st = tensor(r0, r1)
    b0, b1 = r0.layout.names[1], r1.layout.names[1]
    st = apply(CNOT, st, [b0, b1])
    st = apply(H, st, [b0])
    out = measure_computational(st, [b0, b1], rng)[0]
    return int(out == "11")


def _d_side_bell(chat, state, labels, names, rng):
    """Bell-basis parity between the padded input and a side register, when one exists."""
    others = [n for n in state.layout.names if n not in names]
    if not others or state.layout.dim_of(others[0]) != 2:
        return _d_label_z(chat, state, labels, names, rng)
    st = apply(CNOT, state, [names[0], others[0]])
    st = apply(H, st, [names[0]])
    return int(measure_computational(st, [others[0]], rng)[0])


BATTERY: dict[str, Distinguisher] = {
    "output": _d_output,
    "branch-pointer": _d_branch_pointer,
    "resource-z": _d_resource_z,
    "resource-x": _d_resource_x,
    "label-z": _d_label_z,
    "label-x": _d_label_x,
    "label-pointer": _d_label_pointer,
    "row-bit": _d_row_bit,
    "resource-swap": _d_resource_swap,
    "side-bell": _d_side_bell,
}


def _junk_inputs(chat, state, labels, names, rng):
    """Feed the open wires arbitrary bits instead of teleporting (documented limitation, not in the battery)."""
    known, _ = DEFAULT._branch_labels(chat, labels)
    return int(DEFAULT._finish(chat, known, "0" * (3 * chat.lq))[0])


ATTACKS: dict[str, Distinguisher] = {"junk-open-wires": _junk_inputs}


@dataclass(frozen=True)
class DistinguisherResult:
    name: str
    p_first: float
    p_second: float
    advantage: float
    ci: tuple[float, float]

    @property
    def consistent_with_zero(self) -> bool:
        return self.ci[0] <= 0.0 <= self.ci[1]


@dataclass(frozen=True)
class IndistReport:
    trials: int
    precondition_distance: float
    results: tuple[DistinguisherResult, ...]

    @property
    def max_advantage(self) -> float:
        return max(abs(r.advantage) for r in self.results)

    @property
    def all_consistent_with_zero(self) -> bool:
        return all(r.consistent_with_zero for r in self.results)

    def to_json(self) -> dict:
        return {"trials": self.trials, "precondition_distance": self.precondition_distance,
                "results": [{"name": r.name, "p_first": r.p_first, "p_second": r.p_second,
                             "advantage": r.advantage, "ci": list(r.ci)} for r in self.results]}


def _simultaneous_z(k: int, level: float = 0.95) -> float:
    """Two-sided Bonferroni critical value for ``k`` simultaneous intervals."""
    return NormalDist().inv_cdf(1 - (1 - level) / (2 * k))


def dqre_indist_check(C: HybridCircuit, D: HybridCircuit, input_C: DqreInput, input_D: DqreInput, *,
                      trials: int = 1000, seed: int = 0, lam: int = 16,
                      battery: dict[str, Distinguisher] | None = None) -> IndistReport:
    """Empirical advantage of each distinguisher between encodings of ``(C, input_C)`` and ``(D, input_D)``.

    Intervals are simultaneous: the whole battery has 95% family-wise coverage.

    Raises :class:`DqrePreconditionError` unless both circuits have the same
    size and their exact outputs (jointly with side registers) coincide.
    """
    if C.size != D.size:
        raise DqrePreconditionError("circuits have different sizes")
    out_C = direct_eval(C, input_C.state, input_C.x_c, input_C.inputs)
    out_D = direct_eval(D, input_D.state, input_D.x_c, input_D.inputs)
    dist = out_C.distance(out_D)
    if dist > 1e-9:
        raise DqrePreconditionError(f"circuit outputs differ: trace distance {dist:.3g}")
    battery = BATTERY if battery is None else battery
    dq = PaddedTeleportDqre(lam)
    counts = {name: [0, 0] for name in battery}
    for side, (circ, inp) in enumerate(((C, input_C), (D, input_D))):
        for trial in range(trials):
            rng = stream(seed, side, trial)
            bundle = dq.encode(circ, rng)
            names = tuple(inp.inputs) if inp.inputs is not None else tuple(input_names(circ.lq))
            state, labels = label_inputs(dq, bundle, inp.state, inp.x_c, names)
            for name, dist_fn in battery.items():
                counts[name][side] += dist_fn(bundle.circuit, state, labels, names, rng)
    results = []
    z = _simultaneous_z(len(counts))
    for name, (k1, k2) in counts.items():
        p1, p2 = k1 / trials, k2 / trials
        half = z * np.sqrt(max(p1 * (1 - p1) + p2 * (1 - p2), 1.0 / trials) / trials)
        adv = p1 - p2
        results.append(DistinguisherResult(name, p1, p2, adv, (adv - half, adv + half)))
    return IndistReport(trials, dist, tuple(results))

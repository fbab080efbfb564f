"""Decomposable classical randomized encoding: Yao garbling with point-and-permute.

Each wire carries two labels of ``lam + 1`` bits; the last bit is the
pointer, equal to ``value xor perm(wire)``. A binary gate becomes four rows,
each a double encryption under the two input labels using the nonce SKE,
ordered by the pointer bits. NOT gates are free (labels swap), constant
gates are garbler inputs whose single active label is published.

Evaluation can be staged: :func:`eval_partial` evaluates every gate whose
inputs are known, which lets the quantum encoder reveal intermediate wires
before the remaining inputs exist.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import bits
from .symcrypto import NonceSke

TAG_BITS = 16
BINARY = {"AND": lambda a, b: a & b, "XOR": lambda a, b: a ^ b, "OR": lambda a, b: a | b}


class GarbleError(ValueError):
    """Garbled evaluation failed (malformed or inconsistent labels)."""


@dataclass(frozen=True)
class Gate:
    kind: str
    inputs: tuple[int, ...] = ()
    value: int = 0

    def __post_init__(self):
        arity = {"NOT": 1, "CONST": 0}.get(self.kind, 2)
        if self.kind not in BINARY and self.kind not in ("NOT", "CONST"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.inputs) != arity:
            raise ValueError(f"{self.kind} gate needs {arity} inputs, got {self.inputs}")


@dataclass(frozen=True)
class BoolCircuit:
    """Gates define wires ``n_inputs, n_inputs + 1, ...`` in order."""

    n_inputs: int
    gates: tuple[Gate, ...]
    outputs: tuple[int, ...]

    def __post_init__(self):
        for g_idx, g in enumerate(self.gates):
            for w in g.inputs:
                if not 0 <= w < self.n_inputs + g_idx:
                    raise ValueError(f"gate {g_idx} reads wire {w} before it is defined")
        for w in self.outputs:
            if not 0 <= w < self.n_wires:
                raise ValueError(f"output wire {w} is undefined")

    @property
    def n_wires(self) -> int:
        return self.n_inputs + len(self.gates)

    @property
    def size(self) -> int:
        return len(self.gates)

    def skeleton(self) -> tuple:
        """Public shape of the circuit: wiring and free-gate positions, no functions."""
        shape = tuple(("NOT" if g.kind == "NOT" else "CONST" if g.kind == "CONST" else "BIN", g.inputs)
                      for g in self.gates)
        return (self.n_inputs, shape, self.outputs)

    def wire_values(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.n_inputs:
            raise ValueError(f"circuit takes {self.n_inputs} inputs, got {len(x)}")
        vals = [int(v) for v in x]
        for g in self.gates:
            if g.kind == "CONST":
                vals.append(g.value)
            elif g.kind == "NOT":
                vals.append(1 - vals[g.inputs[0]])
            else:
                vals.append(BINARY[g.kind](vals[g.inputs[0]], vals[g.inputs[1]]))
        return vals

    def evaluate(self, x: Sequence[int] | str) -> str:
        vals = self.wire_values([int(c) for c in x])
        return "".join(str(vals[w]) for w in self.outputs)

    def to_json(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "gates": [{"kind": g.kind, "inputs": list(g.inputs), **({"value": g.value} if g.kind == "CONST" else {})}
                      for g in self.gates],
            "outputs": list(self.outputs),
        }

    @classmethod
    def from_json(cls, d: dict) -> "BoolCircuit":
        gates = tuple(Gate(g["kind"], tuple(g["inputs"]), g.get("value", 0)) for g in d["gates"])
        return cls(d["n_inputs"], gates, tuple(d["outputs"]))


class CircuitBuilder:
    """Small helper for writing circuits gate by gate."""

    def __init__(self, n_inputs: int):
        self.n_inputs = n_inputs
        self.gates: list[Gate] = []

    def _add(self, g: Gate) -> int:
        self.gates.append(g)
        return self.n_inputs + len(self.gates) - 1

    def const(self, v: int) -> int:
        return self._add(Gate("CONST", (), int(v)))

    def xor(self, a: int, b: int) -> int:
        return self._add(Gate("XOR", (a, b)))

    def and_(self, a: int, b: int) -> int:
        return self._add(Gate("AND", (a, b)))

    def not_(self, a: int) -> int:
        return self._add(Gate("NOT", (a,)))

    def xor_all(self, wires: Sequence[int]) -> int:
        acc = wires[0]
        for w in wires[1:]:
            acc = self.xor(acc, w)
        return acc

    def mux(self, sel: int, if0: int, if1: int) -> int:
        """``if0 xor (sel and (if0 xor if1))``."""
        return self.xor(if0, self.and_(sel, self.xor(if0, if1)))

    def build(self, outputs: Iterable[int]) -> BoolCircuit:
        return BoolCircuit(self.n_inputs, tuple(self.gates), tuple(outputs))


# ---------------------------------------------------------------------------
# garbling


def _ptr(label: str) -> int:
    return int(label[-1])


def _key(label: str) -> str:
    return label[:-1]


@dataclass(frozen=True, eq=False)
class GarbledCircuit:
    skeleton: tuple
    lam: int
    tables: dict[int, tuple[str, str, str, str]]
    const_labels: dict[int, str]
    output_perm: dict[int, int]
    open_labels: dict[int, tuple[str, str]] = field(default_factory=dict)
    master_seed: int = 0

    @property
    def n_inputs(self) -> int:
        return self.skeleton[0]

    @property
    def outputs(self) -> tuple[int, ...]:
        return self.skeleton[2]


@dataclass(frozen=True, eq=False)
class WireLabels:
    """Garbling randomness: both labels of every input wire."""

    labels: dict[int, tuple[str, str]]


def _row_ske(lam: int, master_seed: int) -> NonceSke:
    return NonceSke(lam, None, master_seed=master_seed)


def _fresh_label(rng, lam: int, value: int, perm: int) -> str:
    return bits.random_bits(rng, lam) + str(value ^ perm)


def dre_garble(C: BoolCircuit, lam: int, rng: np.random.Generator, *, open_inputs: Iterable[int] = (),
               reveal: Iterable[int] = (), master_seed: int = 0) -> tuple[GarbledCircuit, WireLabels]:
    """Garble ``C``; returns the encoded circuit and the input-label randomness.

    ``open_inputs`` are input wires whose two labels are published in the
    encoded circuit. ``reveal`` lists extra wires (besides the outputs)
    whose decoding bit is published.
    """
    ske = _row_ske(lam, master_seed)
    perms: list[int] = []
    labels: list[tuple[str, str]] = []

    def new_wire():
        p = int(rng.integers(0, 2))
        perms.append(p)
        labels.append((_fresh_label(rng, lam, 0, p), _fresh_label(rng, lam, 1, p)))

    for _ in range(C.n_inputs):
        new_wire()
    tables: dict[int, tuple[str, str, str, str]] = {}
    const_labels: dict[int, str] = {}
    tag = bits.zeros(TAG_BITS)
    for g_idx, g in enumerate(C.gates):
        w = C.n_inputs + g_idx
        if g.kind == "NOT":
            a = g.inputs[0]
            perms.append(perms[a] ^ 1)
            labels.append((labels[a][1], labels[a][0]))
            continue
        new_wire()
        if g.kind == "CONST":
            const_labels[w] = labels[w][g.value]
            continue
        a, b = g.inputs
        fn = BINARY[g.kind]
        rows: list[str] = [""] * 4
        for va in (0, 1):
            for vb in (0, 1):
                la, lb = labels[a][va], labels[b][vb]
                inner = ske.enc_bits(_key(lb), labels[w][fn(va, vb)] + tag, rng)
                rows[2 * _ptr(la) + _ptr(lb)] = ske.enc_bits(_key(la), inner, rng)
        tables[w] = tuple(rows)
    reveal_set = set(C.outputs) | set(reveal)
    gc = GarbledCircuit(
        skeleton=C.skeleton(),
        lam=lam,
        tables=tables,
        const_labels=const_labels,
        output_perm={w: perms[w] for w in sorted(reveal_set)},
        open_labels={w: labels[w] for w in open_inputs},
        master_seed=master_seed,
    )
    return gc, WireLabels({i: labels[i] for i in range(C.n_inputs)})


def dre_label(i: int, x_i: int, r: WireLabels) -> str:
    return r.labels[i][int(x_i)]


def eval_partial(gc: GarbledCircuit, known: dict[int, str]) -> dict[int, str]:
    """Evaluate every gate whose input labels are available."""
    ske = _row_ske(gc.lam, gc.master_seed)
    n_inputs, shape, _ = gc.skeleton
    out = dict(known)
    out.update(gc.const_labels)
    tag = bits.zeros(TAG_BITS)
    for g_idx, (kind, inputs) in enumerate(shape):
        w = n_inputs + g_idx
        if w in out or not all(i in out for i in inputs):
            continue
        if kind == "NOT":
            out[w] = out[inputs[0]]
            continue
        la, lb = out[inputs[0]], out[inputs[1]]
        row = gc.tables[w][2 * _ptr(la) + _ptr(lb)]
        plain = ske.dec_bits(_key(lb), ske.dec_bits(_key(la), row))
        if plain[-TAG_BITS:] != tag:
            raise GarbleError(f"row decryption failed at wire {w}: malformed label")
        out[w] = plain[:-TAG_BITS]
    return out


def decode(gc: GarbledCircuit, known: dict[int, str], wires: Iterable[int]) -> str:
    out = []
    for w in wires:
        if w not in gc.output_perm:
            raise GarbleError(f"wire {w} has no published decoding bit")
        if w not in known:
            raise GarbleError(f"wire {w} was not evaluated")
        out.append(str(_ptr(known[w]) ^ gc.output_perm[w]))
    return "".join(out)


def dre_eval(gc: GarbledCircuit, labels: Sequence[str]) -> str:
    if len(labels) != gc.n_inputs:
        raise GarbleError(f"expected {gc.n_inputs} labels, got {len(labels)}")
    for lab in labels:
        if len(lab) != gc.lam + 1 or set(lab) - {"0", "1"}:
            raise GarbleError("malformed label")
    known = eval_partial(gc, dict(enumerate(labels)))
    return decode(gc, known, gc.outputs)


def dre_simulate(skeleton: tuple, lam: int, y: str, rng: np.random.Generator,
                 master_seed: int = 0) -> tuple[GarbledCircuit, list[str]]:
    """Simulated encoding from the public shape and the output only."""
    ske = _row_ske(lam, master_seed)
    n_inputs, shape, outputs = skeleton
    if len(y) != len(outputs):
        raise ValueError("output length does not match the skeleton")
    active = [bits.random_bits(rng, lam + 1) for _ in range(n_inputs)]
    tables: dict[int, tuple[str, str, str, str]] = {}
    const_labels: dict[int, str] = {}
    tag = bits.zeros(TAG_BITS)
    for g_idx, (kind, inputs) in enumerate(shape):
        w = n_inputs + g_idx
        if kind == "NOT":
            active.append(active[inputs[0]])
            continue
        lab = bits.random_bits(rng, lam + 1)
        active.append(lab)
        if kind == "CONST":
            const_labels[w] = lab
            continue
        la, lb = active[inputs[0]], active[inputs[1]]
        row_len = 2 * lam + lam + 1 + TAG_BITS
        rows = [bits.random_bits(rng, row_len) for _ in range(4)]
        inner = ske.enc_bits(_key(lb), lab + tag, rng)
        rows[2 * _ptr(la) + _ptr(lb)] = ske.enc_bits(_key(la), inner, rng)
        tables[w] = tuple(rows)
    output_perm = {w: _ptr(active[w]) ^ int(y[j]) for j, w in enumerate(outputs)}
    gc = GarbledCircuit(skeleton, lam, tables, const_labels, output_perm, {}, master_seed)
    return gc, active[:n_inputs]

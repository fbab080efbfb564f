import itertools
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from uclab import bits
from uclab.garble import (
    TAG_BITS, BoolCircuit, CircuitBuilder, Gate, GarbleError, _key, _ptr, _row_ske, decode, dre_eval,
    dre_garble, dre_label, dre_simulate, eval_partial,
)
from uclab.rng import stream

seeds = st.integers(0, 2**32 - 1)


def and_circuit():
    return BoolCircuit(2, (Gate("AND", (0, 1)),), (2,))


def mix_circuit():
    B = CircuitBuilder(3)
    a = B.xor(0, 1)
    b = B.and_(a, 2)
    c = B.xor(b, B.not_(0))
    return B.build([b, c])


def garble_eval(C, x, rng, lam=16):
    gc, r = dre_garble(C, lam, rng)
    return dre_eval(gc, [dre_label(i, xi, r) for i, xi in enumerate(x)])


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("NAND", (0, 1))
    with pytest.raises(ValueError):
        Gate("NOT", (0, 1))
    with pytest.raises(ValueError):
        BoolCircuit(1, (Gate("AND", (0, 1)),), (1,))
    with pytest.raises(ValueError):
        BoolCircuit(1, (), (3,))


def test_and_truth_table(rng):
    C = and_circuit()
    gc, r = dre_garble(C, 16, rng)
    for a, b in itertools.product((0, 1), repeat=2):
        assert dre_eval(gc, [dre_label(0, a, r), dre_label(1, b, r)]) == str(a & b)


def test_identity_circuit(rng):
    C = BoolCircuit(1, (), (0,))
    for x in "01":
        assert garble_eval(C, x, rng) == x


def test_mix_circuit_exhaustive(rng):
    C = mix_circuit()
    assert C.size == 4
    for x in bits.all_strings(3):
        assert garble_eval(C, x, rng) == C.evaluate(x)


def test_labels_distinct(rng):
    gc, r = dre_garble(mix_circuit(), 16, rng)
    for i in range(3):
        l0, l1 = r.labels[i]
        assert l0 != l1 and _ptr(l0) != _ptr(l1)
        assert len(l0) == 17


def test_simulator_correctness(rng):
    C = mix_circuit()
    for y in bits.all_strings(2):
        gc, labels = dre_simulate(C.skeleton(), 16, y, rng)
        assert dre_eval(gc, labels) == y


def test_four_rows_per_binary_gate(rng):
    gc, _ = dre_garble(mix_circuit(), 16, rng)
    assert len(gc.tables) == 3 and all(len(rows) == 4 for rows in gc.tables.values())


def _pattern(gc, labels):
    """What an evaluator sees: pointer bits, which rows open under the active labels, the output."""
    ske = _row_ske(gc.lam, gc.master_seed)
    la, lb = labels
    rows = gc.tables[2]
    opens = tuple(ske.dec_bits(_key(lb), ske.dec_bits(_key(la), row))[-TAG_BITS:] == "0" * TAG_BITS
                  for row in rows)
    return (_ptr(la), _ptr(lb), opens, dre_eval(gc, labels))


def test_real_vs_simulated_patterns():
    C = and_circuit()
    n = 10_000
    r = stream(77)
    real, sim = Counter(), Counter()
    x = (1, 1)
    for _ in range(n):
        gc, w = dre_garble(C, 8, r)
        real[_pattern(gc, [dre_label(i, xi, w) for i, xi in enumerate(x)])] += 1
        gc, labels = dre_simulate(C.skeleton(), 8, C.evaluate("11"), r)
        sim[_pattern(gc, labels)] += 1
    tv = 0.5 * sum(abs(real[k] - sim[k]) for k in set(real) | set(sim)) / n
    assert tv <= 0.05


def test_malformed_label_detected(rng):
    C = and_circuit()
    gc, r = dre_garble(C, 16, rng)
    good = dre_label(0, 1, r)
    bad = bits.xor(good, "1" + "0" * 16)
    with pytest.raises(GarbleError):
        dre_eval(gc, [bad, dre_label(1, 1, r)])
    with pytest.raises(GarbleError):
        dre_eval(gc, [good[:-1], dre_label(1, 1, r)])
    with pytest.raises(GarbleError):
        dre_eval(gc, [good])


def test_staged_evaluation_and_reveal(rng):
    B = CircuitBuilder(3)
    mid = B.xor(0, 1)
    out = B.and_(mid, 2)
    C = B.build([out])
    gc, r = dre_garble(C, 16, rng, open_inputs=[2], reveal=[mid])
    known = eval_partial(gc, {0: dre_label(0, 1, r), 1: dre_label(1, 0, r)})
    assert decode(gc, known, [mid]) == "1" and out not in known
    assert set(gc.open_labels) == {2}
    known[2] = gc.open_labels[2][1]
    assert decode(gc, eval_partial(gc, known), [out]) == "1"
    with pytest.raises(GarbleError):
        decode(gc, known, [0])


def test_const_gates(rng):
    B = CircuitBuilder(1)
    k = B.const(1)
    C = B.build([B.xor(0, k), k])
    for x in "01":
        assert garble_eval(C, x, rng) == C.evaluate(x)


def test_json_round_trip():
    C = mix_circuit()
    assert BoolCircuit.from_json(C.to_json()) == C


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 4))
    gates = []
    for g in range(draw(st.integers(0, 6))):
        w = n + g
        kind = draw(st.sampled_from(["AND", "XOR", "OR", "NOT", "CONST"]))
        if kind == "CONST":
            gates.append(Gate(kind, (), draw(st.integers(0, 1))))
        elif kind == "NOT":
            gates.append(Gate(kind, (draw(st.integers(0, w - 1)),)))
        else:
            gates.append(Gate(kind, (draw(st.integers(0, w - 1)), draw(st.integers(0, w - 1)))))
    total = n + len(gates)
    outs = draw(st.lists(st.integers(0, total - 1), min_size=1, max_size=3))
    return BoolCircuit(n, tuple(gates), tuple(outs))


@given(circuits(), seeds)
def test_garbling_correct_on_random_circuits(C, seed):
    r = stream(seed)
    x = bits.random_bits(r, C.n_inputs)
    assert garble_eval(C, x, r, lam=8) == C.evaluate(x)


@given(circuits(), seeds)
def test_simulation_correct_on_random_circuits(C, seed):
    r = stream(seed)
    if len(set(C.outputs)) != len(C.outputs):
        # a repeated output wire cannot carry two different simulated values
        y = C.evaluate(bits.random_bits(r, C.n_inputs))
    else:
        y = bits.random_bits(r, len(C.outputs))
    gc, labels = dre_simulate(C.skeleton(), 8, y, r)
    assert dre_eval(gc, labels) == y

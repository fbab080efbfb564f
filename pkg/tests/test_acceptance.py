"""Acceptance suite: one test per criterion, summarized at the end of the run."""
import time
from statistics import NormalDist

import numpy as np
import pytest

from conftest import record
from uclab import bits
from uclab.compilers import ExpandedScheme, IdcopyScheme, NormalFormScheme, PruFamily
from uclab.dqre import PaddedTeleportDqre, bundle_to_json, direct_eval, dqre_encode, dqre_label_c, label_inputs, \
    load_corpus, resample_resources
from uclab.games import SHIPPED, GameConfig, make_strategy, paired_reduction, run_clone, run_idclone
from uclab.qstate import (
    DensityMatrix, RegisterLayout, apply, bell_state, haar_unitary, partial_trace, random_density,
    random_pure_state, reorder, tensor, trace_distance,
)
from uclab.rng import stream
from uclab.symcrypto import NonceSke, ske_pseudorandom_variant
from uclab.twirl import TwirlConfig, copies, exact_twirl_B, mc_twirl_B, purification, sim_t
from uclab.ucbit import ClassicalControlBit, ConjugateCodingBit

pytestmark = pytest.mark.acceptance


def worst_failure(scheme, pairs):
    """Largest 1 - Pr[Dec(Enc(m)) = m] over (dk, ciphertext, m) triples, exact evaluation."""
    return max(1 - scheme.dec_distribution(dk, ct).get(m, 0.0) for dk, ct, m in pairs)


def exact_pairs(scheme, keys, seed, messages=None):
    r = stream(seed)
    out = []
    for _ in range(keys):
        ek, dk = scheme.gen(r)
        for m in messages or bits.all_strings(scheme.message_length):
            out.append((dk, scheme.enc(ek, m, r), m))
    return out


def test_criterion_1_perfect_correctness():
    t0 = time.time()
    worst = {}
    for n in (1, 2, 3, 4):
        for cls in (ConjugateCodingBit, ClassicalControlBit):
            sch = cls(n)
            pairs = []
            for kb in bits.all_strings(sch.key_length):
                key = sch.key_from_bits(kb)
                for m in "01":
                    # the full mixed ciphertext, i.e. every encryption randomness at once
                    pairs.append((key, sch.channel(key, m), m))
            worst[f"{sch.name}(n={n})"] = worst_failure(sch, pairs)
    ske = NonceSke(16, 4)
    r = stream(1)
    fails = 0
    for _ in range(20):
        k, _ = ske.gen(r)
        fails += sum(ske.dec(k, ske.enc(k, m, r)) != m for m in bits.all_strings(4))
    worst["ske"] = float(fails)
    for ml in (1, 2):
        for n in (1, 2):
            sch = ExpandedScheme(ConjugateCodingBit(n), NonceSke(16, 17), ml, PaddedTeleportDqre(16))
            worst[f"expand(n={n},lm={ml})"] = worst_failure(sch, exact_pairs(sch, 3, 10 * n + ml))
        sch = NormalFormScheme(ConjugateCodingBit(2), ske_pseudorandom_variant(16, 17), ml, PaddedTeleportDqre(16))
        worst[f"nf(lm={ml})"] = worst_failure(sch, exact_pairs(sch, 3, 20 + ml))
    for n in (1, 2, 3):
        sch = IdcopyScheme(ConjugateCodingBit(n))
        worst[f"idcopy(bb84 n={n})"] = worst_failure(sch, exact_pairs(sch, 5, 30 + n))
    nf1 = NormalFormScheme(ConjugateCodingBit(1), ske_pseudorandom_variant(8, 9), 1, PaddedTeleportDqre(8))
    sch = IdcopyScheme(nf1)
    worst["idcopy(nf)"] = worst_failure(sch, exact_pairs(sch, 1, 40))
    elapsed = time.time() - t0
    bad = {k: v for k, v in worst.items() if v > 1e-9}
    ok = not bad and elapsed <= 120
    record(1, ok, f"{len(worst)} scheme instances, max failure {max(worst.values()):.1e}, {elapsed:.0f}s")
    assert not bad, bad
    assert elapsed <= 120


def test_criterion_2_purification_channel():
    t0 = time.time()
    rng = stream(2)
    exact_max, mc = 0.0, {}
    for t in (1, 2, 3):
        tc = TwirlConfig(t, 2, 2)
        for _ in range(50):
            sigma = random_density(RegisterLayout.of(("A", 2)), rng)
            phi = apply(haar_unitary(2, rng), purification(sigma, 2), ["B"])
            exact_max = max(exact_max, trace_distance(exact_twirl_B(copies(phi, t), tc), sim_t(sigma, tc)))
        sigma = random_density(RegisterLayout.of(("A", 2)), rng)
        X = copies(purification(sigma, 2), t)
        mc[t] = trace_distance(mc_twirl_B(X, tc, 20000, rng), exact_twirl_B(X, tc))
    elapsed = time.time() - t0
    ok = exact_max <= 1e-8 and max(mc.values()) <= 0.02 and elapsed <= 300
    record(2, ok, f"exact max {exact_max:.1e}, MC " + ", ".join(f"t={t}:{v:.4f}" for t, v in mc.items())
           + f", {elapsed:.0f}s")
    assert exact_max <= 1e-8
    assert max(mc.values()) <= 0.02
    assert elapsed <= 300


def test_criterion_3_idcopy_identity():
    t0 = time.time()
    rng = stream(3)
    worst = 0.0
    for j in range(100):
        base = ConjugateCodingBit(1 + j % 3)
        sch = IdcopyScheme(base)
        key, _ = sch.gen(rng)
        m = str(int(rng.integers(0, 2)))
        phi = sch.enc_with(key, m, sch.sample_randomness(rng))
        rho_a = reorder(partial_trace(phi, base.names), base.names)
        worst = max(worst, float(np.abs(rho_a.matrix - base.channel(key, m).matrix).max()))
    elapsed = time.time() - t0
    record(3, worst <= 1e-9 and elapsed <= 60, f"100 triples, max entry deviation {worst:.1e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed <= 60


def entangled_input(lq, rng):
    state = bell_state(["q0", "e0"])
    for i in range(1, lq):
        state = tensor(state, bell_state([f"q{i}", f"e{i}"]))
    return random_pure_state(state.layout, rng)


def test_criterion_4_dqre_side_information():
    t0 = time.time()
    rng = stream(4)
    dq = PaddedTeleportDqre(16)
    worst = 0.0
    corpus = load_corpus()
    for C in corpus:
        for _ in range(3):
            state = entangled_input(C.lq, rng)
            x_c = bits.random_bits(rng, C.lc)
            bundle = dq.encode(C, rng)
            labelled, labels = label_inputs(dq, bundle, state, x_c)
            out = dq.eval(bundle.circuit, labelled, labels)
            worst = max(worst, out.distance(direct_eval(C, state, x_c)))
    elapsed = time.time() - t0
    record(4, worst <= 1e-9 and elapsed <= 180, f"{len(corpus)} circuits x 3 inputs, max distance {worst:.1e}, "
           f"{elapsed:.0f}s")
    assert worst <= 1e-9
    assert elapsed <= 180


def test_criterion_5_negative_controls():
    classical = {"ucbit": {"kind": "classical", "n": 1}}
    bb84 = {"ucbit": {"kind": "bb84", "n": 2}}
    copy_c = run_clone(GameConfig("clone", trials=1000, seed=51, stack=classical, layer="ucbit"), make_strategy("copy"))
    copy_i = run_idclone(GameConfig("idclone", trials=1000, seed=52, stack=classical, layer="ucbit"),
                         make_strategy("copy"))
    guesses = {}
    for label, stack in (("classical", classical), ("bb84", bb84)):
        guesses[f"clone/{label}"] = run_clone(GameConfig("clone", trials=10000, seed=53, stack=stack, layer="ucbit"),
                                              make_strategy("guess"))
        guesses[f"idclone/{label}"] = run_idclone(
            GameConfig("idclone", trials=10000, seed=54, stack=stack, layer="ucbit"), make_strategy("guess"))
    ok = copy_c.estimate == 1.0 and copy_i.estimate == 1.0 and all(g.contains(0.5) for g in guesses.values())
    record(5, ok, f"copy clone {copy_c.estimate}, idclone {copy_i.estimate}; guess "
           + ", ".join(f"{k} {g.estimate:.3f}" for k, g in guesses.items()))
    assert copy_c.estimate == 1.0 and copy_i.estimate == 1.0
    for k, g in guesses.items():
        assert g.contains(0.5), (k, g)


@pytest.mark.parametrize("kind", ["classical", "bb84"])
def test_criterion_6_reduction_fidelity(kind):
    t0 = time.time()
    cfg = GameConfig("clone", trials=10000, seed=60, stack={"ucbit": {"kind": kind, "n": 1}})
    results = {name: paired_reduction(cfg, name) for name in SHIPPED}
    elapsed = time.time() - t0
    ok = all(r.agree for r in results.values()) and elapsed <= 600
    record(6, ok, f"{kind} n=1 base: " + ", ".join(
        f"{n} {r.direct.estimate:.3f}/{r.wrapped.estimate:.3f}{'' if r.agree else ' DISAGREE'}"
        for n, r in results.items()) + f" ({elapsed:.0f}s)")
    for name, r in results.items():
        assert r.agree, (name, r.to_json())
    assert elapsed <= 600


def test_criterion_7_normal_form_pseudorandom():
    sch = NormalFormScheme(ConjugateCodingBit(2), ske_pseudorandom_variant(16, 17), 2, PaddedTeleportDqre(16))
    same = all(a == b for a, b in (sch.gen(stream(s)) for s in range(200)))
    r = stream(7)
    sk, _ = sch.gen(r)
    kb = sch.dk1_bits(sk.dk1)
    rows = []
    for _ in range(1000):
        ct = sch.enc(sk, bits.random_bits(r, 2), r)
        rows.append([int(c) for i in range(sch.ell) for c in ct.grid[i][1 - int(kb[i])]])
    M = np.array(rows)
    n, k = M.shape
    pooled = abs(M.mean() - 0.5) / np.sqrt(0.25 / M.size)
    per_bit = np.abs(M.mean(axis=0) - 0.5) / np.sqrt(0.25 / n)
    # 3 sigma per bit position, held family-wise over the k positions
    z = NormalDist().inv_cdf(1 - 0.0027 / (2 * k))
    ok = same and pooled <= 3 and per_bit.max() <= z
    record(7, ok, f"ek=dk on 200 seeds: {same}; pooled z {pooled:.2f}; max per-bit z {per_bit.max():.2f} "
           f"(threshold {z:.2f}, {k} positions)")
    assert same
    assert pooled <= 3
    assert per_bit.max() <= z


def test_criterion_8_decomposability():
    rng = stream(8)
    dq = PaddedTeleportDqre(16)
    checked = 0
    identical = True
    for C in load_corpus():
        bundle = dqre_encode(C, 16, rng)
        labels = "".join(dqre_label_c(j, x, bundle.r) for j in range(C.lc) for x in (0, 1)).encode()
        classical = bundle_to_json(bundle).encode()
        for s in range(20):
            again = resample_resources(bundle, stream(8, s))
            again_labels = "".join(dqre_label_c(j, x, again.r) for j in range(C.lc) for x in (0, 1)).encode()
            identical &= again_labels == labels and bundle_to_json(again).encode() == classical
            checked += 1
    record(8, identical, f"{checked} resamplings, labels byte-identical: {identical}")
    assert identical

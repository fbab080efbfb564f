import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uclab import bits
from uclab.compilers import (
    ExpandedKeyPair, ExpandedScheme, IdcopyScheme, NormalFormKey, NormalFormScheme, PruFamily,
    SeededPureCiphertext, build_stack, expand_dec, expand_enc, expand_gen, idcopy_dec, idcopy_enc, nf_dec,
    nf_enc, nf_gen, pru_apply, stack_config,
)
from uclab.dqre import PaddedTeleportDqre, TransparentDqre
from uclab.garble import GarbleError
from uclab.qstate import (
    DensityMatrix, PureState, RegisterLayout, partial_trace, purity_top_eigenvalue, random_pure_state, reorder,
    trace_distance,
)
from uclab.rng import stream
from uclab.scheme import ConfigError
from uclab.symcrypto import NonceSke, ske_pseudorandom_variant
from uclab.twirl import TwirlConfig, copies, sim_t
from uclab.ucbit import ClassicalControlBit, ConjugateCodingBit

from conftest import three_sigma

seeds = st.integers(0, 2**32 - 1)


def expanded(n=2, lam=16, ml=2, kind="bb84"):
    base = ConjugateCodingBit(n) if kind == "bb84" else ClassicalControlBit(n)
    return ExpandedScheme(base, NonceSke(lam, lam + 1), ml, PaddedTeleportDqre(lam))


def normal_form(n=2, lam=16, ml=2):
    return NormalFormScheme(ConjugateCodingBit(n), ske_pseudorandom_variant(lam, lam + 1), ml, PaddedTeleportDqre(lam))


# -- expansion -----------------------------------------------------------------

def test_expanded_key_shape(rng):
    sch = expanded(n=4)
    pair = expand_gen(sch, rng)
    assert isinstance(pair, ExpandedKeyPair)
    assert sch.ell == 8 and len(pair.ek.grid_keys) == 8
    assert len({k for row in pair.ek.grid_keys for k in row}) == 16
    assert len(pair.dk.components()) == sch.ell + 1
    kb = sch.dk1_bits(pair.dk.dk1)
    for i in range(sch.ell):
        assert pair.dk.re_keys[i] == pair.ek.grid_keys[i][int(kb[i])]
    assert pair.ek != pair.dk


def test_grid_contents():
    sch = expanded()
    ek, dk = sch.gen(stream(1))
    ct = sch.enc(ek, "10", stream(2))
    # re-derive the encoder randomness: the bundle is the first thing drawn from the stream
    bundle = sch.dqre.encode(sch.constant_circuit("10"), stream(2))
    kb = sch.dk1_bits(dk.dk1)
    for i in range(sch.ell):
        sel = int(kb[i])
        assert sch.ske.dec(ek.grid_keys[i][sel], ct.grid[i][sel]) == sch.dqre.label_c(i, sel, bundle.r)
        assert sch.ske.dec(ek.grid_keys[i][1 - sel], ct.grid[i][1 - sel]) == bits.zeros(sch.label_length)


@pytest.mark.parametrize("m", bits.all_strings(2))
def test_expanded_round_trip_exact(m):
    sch = expanded()
    r = stream(int(m, 2))
    for _ in range(3):
        ek, dk = sch.gen(r)
        ct = expand_enc(sch, ek, m, r)
        assert abs(sch.dec_distribution(dk, ct)[m] - 1) < 1e-9
        assert expand_dec(sch, dk, ct) == m
        assert expand_dec(sch, dk, ct, r) == m


def _tamper(ct, i, b):
    grid = [list(row) for row in ct.grid]
    s = grid[i][b]
    grid[i][b] = s[:-3] + bits.xor(s[-3:], "101")
    return type(ct)(ct.chat, ct.qlabels, tuple(tuple(r) for r in grid))


def test_tampering(rng):
    sch = expanded()
    ek, dk = sch.gen(rng)
    ct = sch.enc(ek, "11", rng)
    kb = sch.dk1_bits(dk.dk1)
    for i in range(sch.ell):
        assert sch.dec(dk, _tamper(ct, i, 1 - int(kb[i]))) == "11"
    with pytest.raises(GarbleError):
        sch.dec(dk, _tamper(ct, 0, int(kb[0])))


def test_reusability(rng):
    sch = expanded()
    ek, dk = sch.gen(rng)
    msgs = ["00", "01", "10", "11", "01"]
    cts = [sch.enc(ek, m, rng) for m in msgs]
    assert [sch.dec(dk, c) for c in cts] == msgs


def test_classical_base_and_transparent_dqre(rng):
    sch = ExpandedScheme(ClassicalControlBit(1), NonceSke(16, 1), 2, TransparentDqre())
    ek, dk = sch.gen(rng)
    for m in bits.all_strings(2):
        assert sch.dec(dk, sch.enc(ek, m, rng)) == m


def test_label_length_mismatch():
    with pytest.raises(ConfigError):
        ExpandedScheme(ConjugateCodingBit(2), NonceSke(16, 8), 2, PaddedTeleportDqre(16))
    with pytest.raises(ConfigError):
        ExpandedScheme(ConjugateCodingBit(2), NonceSke(16, 17), 0)


# -- normal form ---------------------------------------------------------------

def test_nf_requires_pseudorandom_ske():
    with pytest.raises(ConfigError):
        NormalFormScheme(ConjugateCodingBit(2), NonceSke(16, 17), 2)


def test_nf_normal_form(rng):
    sch = normal_form()
    for s in range(5):
        ek, dk = sch.gen(stream(s))
        assert ek == dk and isinstance(ek, NormalFormKey)
        assert len(ek.components()) == sch.ell + 1
    assert nf_gen(sch, stream(0)) == sch.gen(stream(0))[0]


@pytest.mark.parametrize("m", bits.all_strings(2))
def test_nf_round_trip(m):
    sch = normal_form()
    r = stream(10 + int(m, 2))
    sk = nf_gen(sch, r)
    ct = nf_enc(sch, sk, m, r)
    assert abs(sch.dec_distribution(sk, ct)[m] - 1) < 1e-9
    assert nf_dec(sch, sk, ct, r) == m


def unselected_bits(sch, n_enc, seed):
    r = stream(seed)
    sk = sch.gen(r)[0]
    kb = sch.dk1_bits(sk.dk1)
    rows = []
    for _ in range(n_enc):
        ct = sch.enc(sk, "01", r)
        rows.append("".join(ct.grid[i][1 - int(kb[i])] for i in range(sch.ell)))
    return np.array([[int(c) for c in row] for row in rows])


def test_nf_unselected_uniform():
    sch = normal_form()
    n = 1000
    M = unselected_bits(sch, n, 21)
    assert abs(M.mean() - 0.5) <= three_sigma(0.5, M.size)
    # per position, with a Bonferroni-adjusted 3-sigma-equivalent threshold
    from statistics import NormalDist
    z = NormalDist().inv_cdf(1 - 0.0027 / (2 * M.shape[1]))
    assert np.all(np.abs(M.mean(axis=0) - 0.5) <= z * np.sqrt(0.25 / n))


def test_normal_form_flags():
    layers = build_stack({"compiler": "idcopy", "idcopy_base": "nf"})
    assert layers["nf"].normal_form and layers["idcopy"].normal_form
    assert not layers["expand"].normal_form


# -- PRU -----------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["ideal", "brickwork", "identity"])
def test_pru_unitary_and_deterministic(mode, rng):
    fam = PruFamily(2, 16, mode)
    k = fam.sample_key(rng)
    U = fam.unitary(k).matrix
    assert np.abs(U @ U.conj().T - np.eye(4)).max() < 1e-9
    state = random_pure_state(RegisterLayout.qubits("x", "y"), rng)
    a = pru_apply(fam, k, state, ["x", "y"])
    b = pru_apply(PruFamily(2, 16, mode), k, state, ["x", "y"])
    assert np.array_equal(a.vector, b.vector)


def test_pru_errors(rng):
    with pytest.raises(ConfigError):
        PruFamily(2, 16, "magic")
    fam = PruFamily(2, 16)
    with pytest.raises(ValueError):
        fam.unitary("01")
    with pytest.raises(ValueError):
        pru_apply(fam, fam.sample_key(rng), PureState.qubits("0", ["x"]), ["x"])


def test_pru_brickwork_depth_default():
    assert PruFamily(3, 8, "brickwork").depth == 6


def test_pru_first_moment():
    fam = PruFamily(2, 16, "ideal")
    r = stream(31)
    acc = np.zeros((4, 4), complex)
    n = 1000
    for _ in range(n):
        U = fam.unitary(fam.sample_key(r)).matrix
        acc += np.outer(U[:, 0], U[:, 0].conj()) / n
    lay = RegisterLayout.qubits("x", "y")
    assert trace_distance(DensityMatrix.unchecked(lay, acc), DensityMatrix.maximally_mixed(lay)) <= 0.05


# -- identical-copy compiler ---------------------------------------------------

def test_idcopy_dense_examples(rng):
    base = ConjugateCodingBit(2)
    sch = IdcopyScheme(base)
    key, _ = sch.gen(rng)
    k = sch.sample_randomness(rng)
    for m in "01":
        phi = idcopy_enc(sch, key, m, k)
        assert abs(purity_top_eigenvalue(phi) - 1) < 1e-9
        rho_a = reorder(partial_trace(phi, base.names), base.names)
        assert np.abs(rho_a.matrix - base.channel(key, m).matrix).max() < 1e-9
        assert idcopy_dec(sch, key, phi) == m
        assert abs(sch.dec_distribution(key, phi)[m] - 1) < 1e-9


def test_idcopy_identity_pru_gives_canonical_encoder(rng):
    base = ConjugateCodingBit(2)
    sch = IdcopyScheme(base, pru_mode="identity")
    key, _ = sch.gen(rng)
    phi = sch.enc(key, "1", rng)
    assert np.allclose(phi.vector, base.pure_encoder(key, "1").vector)


def test_idcopy_garbage_b_register(rng):
    base = ConjugateCodingBit(2)
    sch = IdcopyScheme(base)
    key, _ = sch.gen(rng)
    phi = sch.enc(key, "0", rng)
    rho_a = partial_trace(phi, base.names)
    junk = random_pure_state(RegisterLayout.qubits("r0", "r1"), rng).density()
    from uclab.qstate import tensor
    tampered = tensor(rho_a, junk)
    assert idcopy_dec(sch, key, tampered) == "0"
    with pytest.raises(ValueError):
        sch.dec(key, PureState.qubits("000"))


def test_idcopy_pru_dimension_mismatch():
    with pytest.raises(ConfigError):
        IdcopyScheme(ConjugateCodingBit(2), PruFamily(3))


def test_idcopy_over_normal_form():
    layers = build_stack({"compiler": "idcopy", "idcopy_base": "nf", "dqre": {"lambda": 8}, "ske": {"lambda": 8}})
    sch = layers["idcopy"]
    assert not sch.dense
    r = stream(41)
    sk, dk = sch.gen(r)
    assert sk == dk
    for m in ("01", "10"):
        ct = sch.enc(sk, m, r)
        assert isinstance(ct, SeededPureCiphertext)
        assert abs(sch.dec_distribution(dk, ct)[m] - 1) < 1e-9
        assert sch.dec(dk, ct, r) == m


def flattened(phi, base):
    """Merge the ciphertext qubits into A and the purifier qubits into B."""
    ordered = reorder(phi, list(base.names) + [f"r{i}" for i in range(base.n)])
    d = 2**base.n
    return PureState.unchecked(RegisterLayout.of(("A", d), ("B", d)), ordered.vector)


def idcopy_average(n_qubits, keys, seed, t=2):
    base = ConjugateCodingBit(n_qubits)
    sch = IdcopyScheme(base)
    r = stream(seed)
    key, _ = sch.gen(r)
    acc = 0
    for _ in range(keys):
        acc = acc + copies(flattened(sch.enc(key, "1", r), base), t).matrix / keys
    d = 2**n_qubits
    sigma = DensityMatrix.unchecked(RegisterLayout.of(("A", d)), base.channel(key, "1").matrix)
    target = sim_t(sigma, TwirlConfig(t, d, d))
    return trace_distance(DensityMatrix.unchecked(target.layout, acc), target)


def test_identical_copies_match_purification_channel():
    assert idcopy_average(1, 1000, 51) <= 0.05


@pytest.mark.slow
def test_identical_copies_match_purification_channel_two_qubits():
    # 256-dimensional target: sampling noise at 10^3 keys is ~0.08, so use more keys
    assert idcopy_average(2, 8000, 52) <= 0.05


# -- stacks --------------------------------------------------------------------

def test_build_stack_layers_and_errors():
    assert set(build_stack()) == {"ucbit", "ske", "expand"}
    assert set(build_stack({"compiler": "idcopy"})) == {"ucbit", "ske", "expand", "nf", "idcopy"}
    assert stack_config({"ucbit": {"n": 3}})["ucbit"] == {"kind": "bb84", "n": 3}
    for bad, field in [({"ucbit": {"n": 0}}, "ucbit.n"), ({"compiler": "zip"}, "compiler"),
                       ({"pru": {"mode": "x"}}, "pru.mode"), ({"typo": 1}, "typo"),
                       ({"dqre": {"kind": "x"}}, "dqre.kind"), ({"message_length": 9}, "message_length")]:
        with pytest.raises(ConfigError, match=field):
            build_stack(bad)


@settings(max_examples=8)
@given(seeds, st.sampled_from(bits.all_strings(2)))
def test_expanded_correctness_property(seed, m):
    sch = expanded(n=1, lam=8)
    r = stream(seed)
    ek, dk = sch.gen(r)
    assert abs(sch.dec_distribution(dk, sch.enc(ek, m, r))[m] - 1) < 1e-9

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from uclab.qstate import (
    CNOT, H, I2, X,
    DensityMatrix, DimensionCapError, InvariantError, PureState, RegisterLayout, UnitaryOp,
    apply, bell_state, canonical_purification, dump_json, fidelity, haar_unitary, measure_computational,
    measurement_branches, partial_trace, random_density, random_pure_state, tensor, trace_distance,
)
from uclab.rng import stream

from conftest import three_sigma

seeds = st.integers(0, 2**32 - 1)


def q(bitstring, names=None):
    return PureState.qubits(bitstring, names)


# -- layouts and invariants ----------------------------------------------------

def test_layout_rejects_duplicates_small_dims_and_cap():
    with pytest.raises(InvariantError):
        RegisterLayout.qubits("a", "a")
    with pytest.raises(InvariantError):
        RegisterLayout.of(("a", 1))
    with pytest.raises(DimensionCapError):
        RegisterLayout.qubits(*[f"q{i}" for i in range(13)])


def test_state_constructors_check_invariants():
    lay = RegisterLayout.qubits("a")
    with pytest.raises(InvariantError):
        PureState(lay, np.array([1.0, 1.0]))
    with pytest.raises(InvariantError):
        DensityMatrix(lay, np.array([[1.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(InvariantError):
        DensityMatrix(lay, np.diag([1.5, -0.5]))
    with pytest.raises(InvariantError):
        UnitaryOp(np.array([[1.0, 1.0], [0.0, 1.0]]))


# -- tensor --------------------------------------------------------------------

def test_tensor_identities():
    assert np.allclose(tensor(I2, I2).matrix, np.eye(4))
    v = tensor(q("0", ["a"]), q("1", ["b"])).vector
    assert v[1] == 1 and np.count_nonzero(v) == 1


def test_tensor_index_formula(rng):
    A = random_density(RegisterLayout.of(("a", 2)), rng)
    B = random_density(RegisterLayout.of(("b", 3)), rng)
    T = tensor(A, B).matrix
    for i in range(2):
        for j in range(3):
            for k in range(2):
                for l in range(3):
                    assert abs(T[i * 3 + j, k * 3 + l] - A.matrix[i, k] * B.matrix[j, l]) < 1e-12


def test_tensor_cap():
    big = DensityMatrix.maximally_mixed(RegisterLayout.qubits(*[f"a{i}" for i in range(6)]))
    other = DensityMatrix.maximally_mixed(RegisterLayout.qubits(*[f"b{i}" for i in range(7)]))
    with pytest.raises(DimensionCapError):
        tensor(big, other)


# -- partial trace -------------------------------------------------------------

def test_partial_trace_examples():
    rho = partial_trace(q("01", ["A", "B"]), ["A"])
    assert np.allclose(rho.matrix, [[1, 0], [0, 0]])
    assert np.allclose(partial_trace(bell_state(["A", "B"]), ["A"]).matrix, np.eye(2) / 2)
    with pytest.raises(KeyError):
        partial_trace(bell_state(["A", "B"]), ["C"])


def test_partial_trace_double_sum_oracle(rng):
    psi = random_pure_state(RegisterLayout.of(("A", 3), ("B", 2)), rng)
    v = psi.vector.reshape(3, 2)
    oracle = np.zeros((3, 3), complex)
    for a in range(3):
        for a2 in range(3):
            for b in range(2):
                oracle[a, a2] += v[a, b] * np.conj(v[a2, b])
    assert np.abs(partial_trace(psi, ["A"]).matrix - oracle).max() < 1e-12
    oracle_b = np.einsum("ab,ac->bc", v, v.conj())
    assert np.abs(partial_trace(psi.density(), ["B"]).matrix - oracle_b).max() < 1e-12


@given(seeds, st.integers(2, 4), st.integers(2, 4))
def test_partial_trace_of_product(seed, da, db):
    r = stream(seed)
    A = random_density(RegisterLayout.of(("A", da)), r)
    B = random_density(RegisterLayout.of(("B", db)), r)
    assert np.abs(partial_trace(tensor(A, B), ["A"]).matrix - A.matrix).max() < 1e-12
    assert np.abs(partial_trace(tensor(A, B), ["B"]).matrix - B.matrix).max() < 1e-12


# -- apply ---------------------------------------------------------------------

def test_apply_examples():
    assert np.allclose(apply(X, q("0", ["a"]), ["a"]).vector, [0, 1])
    assert np.allclose(apply(H, q("0", ["a"]), ["a"]).vector, np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(apply(CNOT, q("10", ["a", "b"]), ["a", "b"]).vector, q("11").vector)
    # target order matters: control is the first listed register
    assert np.allclose(apply(CNOT, q("01", ["a", "b"]), ["b", "a"]).vector, q("11").vector)
    with pytest.raises(ValueError):
        apply(CNOT, q("0", ["a"]), ["a"])


def test_apply_matches_explicit_tensor(rng):
    rho = random_density(RegisterLayout.of(("A", 2), ("B", 3)), rng)
    U = haar_unitary(3, rng)
    big = np.kron(np.eye(2), U.matrix)
    oracle = big @ rho.matrix @ big.conj().T
    assert np.abs(apply(U, rho, ["B"]).matrix - oracle).max() < 1e-12


@given(seeds)
def test_apply_preserves_trace_and_hermiticity(seed):
    r = stream(seed)
    rho = random_density(RegisterLayout.qubits("a", "b", "c"), r)
    out = apply(haar_unitary(4, r), rho, ["c", "a"]).matrix
    assert abs(np.trace(out) - 1) < 1e-12
    assert np.abs(out - out.conj().T).max() < 1e-12


# -- measurement ---------------------------------------------------------------

def test_measure_basis_state(rng):
    for _ in range(5):
        o, post = measure_computational(q("1", ["a"]), ["a"], rng)
        assert o == "1"


def test_measure_plus_statistics():
    plus = apply(H, q("0", ["a"]), ["a"])
    r = stream(7)
    n = 10_000
    zeros = sum(measure_computational(plus, ["a"], r)[0] == "0" for _ in range(n))
    assert abs(zeros / n - 0.5) <= three_sigma(0.5, n)


def test_measure_bell_collapses(rng):
    for _ in range(10):
        o, post = measure_computational(bell_state(["a", "b"]), ["a"], rng)
        assert np.allclose(np.abs(post.vector) ** 2, q(o + o).density().matrix.diagonal().real)


def test_measurement_branches_sum_to_one(rng):
    psi = random_pure_state(RegisterLayout.qubits("a", "b", "c"), rng)
    br = measurement_branches(psi, ["a", "c"], discard=True)
    assert abs(sum(p for _, p, _ in br) - 1) < 1e-12
    assert all(post.layout.names == ("b",) for _, _, post in br)


# -- haar ----------------------------------------------------------------------

def test_haar_small_cases(rng):
    u = haar_unitary(1, rng).matrix
    assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-12
    U = haar_unitary(4, rng).matrix
    assert np.abs(U @ U.conj().T - np.eye(4)).max() < 1e-9


def test_haar_unitarity_many_seeds():
    for s in range(100):
        U = haar_unitary(3, stream(s)).matrix
        assert np.abs(U @ U.conj().T - np.eye(3)).max() < 1e-9


def test_haar_first_moment():
    r = stream(3)
    n = 10_000
    vals = np.array([abs(haar_unitary(2, r).matrix[0, 0]) ** 2 for _ in range(n)])
    # |U00|^2 is uniform on [0, 1] for d = 2: variance 1/12
    assert abs(vals.mean() - 0.5) <= 3 * np.sqrt(1 / 12 / n)


# -- purification and distances ------------------------------------------------

def test_canonical_purification_examples(rng):
    zero = DensityMatrix(RegisterLayout.of(("A", 2)), np.diag([1.0, 0.0]))
    assert np.allclose(canonical_purification(zero).vector, [1, 0, 0, 0])
    mixed = DensityMatrix.maximally_mixed(RegisterLayout.of(("A", 2)))
    assert np.allclose(canonical_purification(mixed).vector, bell_state().vector)
    sigma = random_density(RegisterLayout.of(("A", 3)), rng)
    assert np.abs(partial_trace(canonical_purification(sigma), ["A"]).matrix - sigma.matrix).max() < 1e-9
    with pytest.raises(InvariantError):
        canonical_purification(DensityMatrix.unchecked(zero.layout, np.diag([1.5, -0.5])))


@given(seeds, st.integers(2, 5), st.integers(1, 5))
def test_purification_round_trip(seed, d, rank):
    sigma = random_density(RegisterLayout.of(("A", d)), stream(seed), rank=min(rank, d))
    back = partial_trace(canonical_purification(sigma), ["A"])
    assert np.abs(back.matrix - sigma.matrix).max() < 1e-9


def test_trace_distance_examples(rng):
    lay = RegisterLayout.of(("a", 2))
    zero, one = q("0", ["a"]), q("1", ["a"])
    plus = apply(H, zero, ["a"])
    rho = random_density(lay, rng)
    assert trace_distance(rho, rho) < 1e-12
    assert abs(trace_distance(zero, one) - 1) < 1e-12
    closed = np.sqrt(1 - abs(np.vdot(zero.vector, plus.vector)) ** 2)
    assert abs(trace_distance(zero, plus) - closed) < 1e-12
    assert abs(fidelity(zero, plus) - 0.5) < 1e-9
    assert abs(fidelity(rho, rho) - 1) < 1e-9
    with pytest.raises(ValueError):
        trace_distance(zero, q("0", ["b"]))


@given(seeds)
def test_distance_bounds(seed):
    r = stream(seed)
    lay = RegisterLayout.qubits("a", "b")
    x, y = random_density(lay, r), random_density(lay, r)
    td, f = trace_distance(x, y), fidelity(x, y)
    assert 0 <= td <= 1 and 0 <= f <= 1
    # Fuchs-van de Graaf
    assert 1 - np.sqrt(f) <= td + 1e-9 <= np.sqrt(1 - f) + 2e-9


def test_dump_json_row_major():
    d = json.loads(dump_json(q("1", ["a"])))
    assert d["data"] == [[0.0, 0.0], [1.0, 0.0]]
    assert d["layout"] == [["a", 2]]

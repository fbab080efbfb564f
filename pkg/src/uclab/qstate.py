"""Dense finite-dimensional quantum state algebra over named registers.

States, unitaries and channels are plain numpy arrays wrapped in small frozen
dataclasses that carry a :class:`RegisterLayout`. Operations are pure
functions; randomness is always an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from . import bits as _bits

DIM_CAP = 4096
STATE_ATOL = 1e-9
ALGEBRA_ATOL = 1e-12


class InvariantError(ValueError):
    """A state, layout or operator violates its type invariants."""


class DimensionCapError(InvariantError):
    pass


# ---------------------------------------------------------------------------
# layouts


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]
    cap: int = DIM_CAP

    def __post_init__(self):
        regs = tuple((str(n), int(d)) for n, d in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise InvariantError(f"duplicate register names in {names}")
        for n, d in regs:
            if d < 2:
                raise InvariantError(f"register {n!r} has dimension {d} < 2")
        if self.dim > self.cap:
            raise DimensionCapError(f"total dimension {self.dim} exceeds cap {self.cap}")

    @classmethod
    def qubits(cls, *names: str, cap: int = DIM_CAP) -> "RegisterLayout":
        return cls(tuple((n, 2) for n in names), cap=cap)

    @classmethod
    def of(cls, *pairs: tuple[str, int], cap: int = DIM_CAP) -> "RegisterLayout":
        return cls(tuple(pairs), cap=cap)

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @cached_property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @cached_property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.registers else 1

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown register {name!r}; layout has {self.names}") from None

    def dim_of(self, name: str) -> int:
        return self.dims[self.index(name)]

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.registers + other.registers, cap=max(self.cap, other.cap))

    def select(self, names: Iterable[str]) -> "RegisterLayout":
        keep = set(names)
        return RegisterLayout(tuple(r for r in self.registers if r[0] in keep), cap=self.cap)

    def without(self, names: Iterable[str]) -> "RegisterLayout":
        drop = set(names)
        return RegisterLayout(tuple(r for r in self.registers if r[0] not in drop), cap=self.cap)

    def renamed(self, mapping: dict[str, str]) -> "RegisterLayout":
        return RegisterLayout(tuple((mapping.get(n, n), d) for n, d in self.registers), cap=self.cap)


# ---------------------------------------------------------------------------
# value types


def _raw(cls, **fields):
    obj = object.__new__(cls)
    for k, v in fields.items():
        object.__setattr__(obj, k, v)
    return obj


@dataclass(frozen=True, eq=False)
class PureState:
    layout: RegisterLayout
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        object.__setattr__(self, "vector", v)
        self.check()

    def check(self) -> None:
        if self.vector.shape != (self.layout.dim,):
            raise InvariantError(f"vector length {self.vector.shape} != layout dim {self.layout.dim}")
        norm = float(np.vdot(self.vector, self.vector).real)
        if abs(norm - 1.0) > STATE_ATOL:
            raise InvariantError(f"squared norm {norm} is not 1")

    @classmethod
    def unchecked(cls, layout: RegisterLayout, vector: np.ndarray) -> "PureState":
        return _raw(cls, layout=layout, vector=np.asarray(vector, dtype=complex).reshape(-1))

    @classmethod
    def basis(cls, layout: RegisterLayout, index: int | str) -> "PureState":
        if isinstance(index, str):
            index = int(index, 2) if index else 0
        v = np.zeros(layout.dim, dtype=complex)
        v[index] = 1.0
        return cls.unchecked(layout, v)

    @classmethod
    def qubits(cls, bitstring: str, names: Sequence[str] | None = None) -> "PureState":
        names = list(names) if names is not None else [f"q{i}" for i in range(len(bitstring))]
        return cls.basis(RegisterLayout.qubits(*names), bitstring)

    def density(self) -> "DensityMatrix":
        return DensityMatrix.unchecked(self.layout, np.outer(self.vector, self.vector.conj()))

    def copy(self) -> "PureState":
        return PureState.unchecked(self.layout, self.vector.copy())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: RegisterLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        self.check()

    def check(self) -> None:
        d = self.layout.dim
        m = self.matrix
        if m.shape != (d, d):
            raise InvariantError(f"matrix shape {m.shape} != ({d}, {d})")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > STATE_ATOL:
            raise InvariantError("matrix is not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > STATE_ATOL:
            raise InvariantError(f"trace {tr} is not 1")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -STATE_ATOL:
            raise InvariantError("matrix has a negative eigenvalue")

    @classmethod
    def unchecked(cls, layout: RegisterLayout, matrix: np.ndarray) -> "DensityMatrix":
        return _raw(cls, layout=layout, matrix=np.asarray(matrix, dtype=complex))

    @classmethod
    def maximally_mixed(cls, layout: RegisterLayout) -> "DensityMatrix":
        return cls.unchecked(layout, np.eye(layout.dim, dtype=complex) / layout.dim)

    def density(self) -> "DensityMatrix":
        return self

    def copy(self) -> "DensityMatrix":
        return DensityMatrix.unchecked(self.layout, self.matrix.copy())


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        self.check()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check(self) -> None:
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantError(f"unitary must be square, got {m.shape}")
        err = np.linalg.norm(m @ m.conj().T - np.eye(m.shape[0]), 2)
        if err > STATE_ATOL:
            raise InvariantError(f"not unitary: ||UU^dag - I|| = {err:.3e}")

    @classmethod
    def unchecked(cls, matrix: np.ndarray) -> "UnitaryOp":
        return _raw(cls, matrix=np.asarray(matrix, dtype=complex))

    def dagger(self) -> "UnitaryOp":
        return UnitaryOp.unchecked(self.matrix.conj().T)


State = Union[PureState, DensityMatrix]

# standard gates
I2 = UnitaryOp.unchecked(np.eye(2))
X = UnitaryOp.unchecked([[0, 1], [1, 0]])
Y = UnitaryOp.unchecked([[0, -1j], [1j, 0]])
Z = UnitaryOp.unchecked([[1, 0], [0, -1]])
H = UnitaryOp.unchecked(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
S = UnitaryOp.unchecked([[1, 0], [0, 1j]])
CNOT = UnitaryOp.unchecked([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
GATES = {"I": I2, "X": X, "Y": Y, "Z": Z, "H": H, "S": S}


def pauli(a: int, b: int) -> UnitaryOp:
    """The one-time-pad Pauli ``X^a Z^b``."""
    m = np.eye(2, dtype=complex)
    if b:
        m = Z.matrix @ m
    if a:
        m = X.matrix @ m
    return UnitaryOp.unchecked(m)


def bell_state(names: Sequence[str] = ("a", "b")) -> PureState:
    return PureState.unchecked(RegisterLayout.qubits(*names), np.array([1, 0, 0, 1]) / np.sqrt(2))


# ---------------------------------------------------------------------------
# operations


def tensor(x, y):
    """Kronecker product with the concatenated layout."""
    if isinstance(x, UnitaryOp) and isinstance(y, UnitaryOp):
        d = x.dim * y.dim
        if d > DIM_CAP:
            raise DimensionCapError(f"combined dimension {d} exceeds cap {DIM_CAP}")
        return UnitaryOp.unchecked(np.kron(x.matrix, y.matrix))
    if type(x) is not type(y):
        raise TypeError(f"cannot tensor {type(x).__name__} with {type(y).__name__}")
    layout = x.layout.concat(y.layout)
    if isinstance(x, PureState):
        return PureState.unchecked(layout, np.kron(x.vector, y.vector))
    if isinstance(x, DensityMatrix):
        return DensityMatrix.unchecked(layout, np.kron(x.matrix, y.matrix))
    raise TypeError(f"cannot tensor {type(x).__name__}")


def tensor_all(items: Sequence):
    out = items[0]
    for it in items[1:]:
        out = tensor(out, it)
    return out


def density(state: State) -> DensityMatrix:
    return state.density()


def partial_trace(rho: State, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on ``keep`` (kept registers stay in layout order)."""
    keep = set(keep)
    layout = rho.layout
    for name in keep:
        layout.index(name)
    kept = [i for i, n in enumerate(layout.names) if n in keep]
    traced = [i for i, n in enumerate(layout.names) if n not in keep]
    out_layout = layout.select(keep)
    dk = int(np.prod([layout.dims[i] for i in kept], dtype=np.int64))
    dt = int(np.prod([layout.dims[i] for i in traced], dtype=np.int64))
    n = len(layout.dims)
    if isinstance(rho, PureState):
        psi = rho.vector.reshape(layout.dims).transpose(kept + traced).reshape(dk, dt)
        return DensityMatrix.unchecked(out_layout, psi @ psi.conj().T)
    t = rho.matrix.reshape(layout.dims + layout.dims)
    perm = kept + traced + [n + i for i in kept] + [n + i for i in traced]
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    return DensityMatrix.unchecked(out_layout, np.einsum("aibi->ab", t))


def _target_axes(layout: RegisterLayout, targets: Sequence[str]) -> list[int]:
    axes = [layout.index(t) for t in targets]
    if len(set(axes)) != len(axes):
        raise ValueError(f"repeated target registers {targets}")
    return axes


def _apply_left(tensor_: np.ndarray, op: np.ndarray, axes: list[int], tdims: list[int]) -> np.ndarray:
    k = len(axes)
    opt = op.reshape(tdims + tdims)
    out = np.tensordot(opt, tensor_, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def apply(U: UnitaryOp | np.ndarray, state: State, targets: Sequence[str]) -> State:
    """Apply ``U`` to ``targets`` (in the given order), identity elsewhere."""
    mat = U.matrix if isinstance(U, UnitaryOp) else np.asarray(U, dtype=complex)
    layout = state.layout
    axes = _target_axes(layout, targets)
    tdims = [layout.dims[a] for a in axes]
    if mat.shape != (int(np.prod(tdims)), int(np.prod(tdims))):
        raise ValueError(f"operator shape {mat.shape} does not match targets {targets} with dims {tdims}")
    if isinstance(state, PureState):
        t = state.vector.reshape(layout.dims)
        t = _apply_left(t, mat, axes, tdims)
        return PureState.unchecked(layout, t.reshape(-1))
    n = len(layout.dims)
    t = state.matrix.reshape(layout.dims + layout.dims)
    t = _apply_left(t, mat, axes, tdims)
    t = _apply_left(t, mat.conj(), [n + a for a in axes], tdims)
    d = layout.dim
    return DensityMatrix.unchecked(layout, t.reshape(d, d))


def reorder(state: State, names: Sequence[str]) -> State:
    """Permute registers into the order ``names`` (must be all of them)."""
    layout = state.layout
    if sorted(names) != sorted(layout.names):
        raise ValueError(f"reorder needs every register exactly once: {names} vs {layout.names}")
    perm = [layout.index(n) for n in names]
    new_layout = RegisterLayout(tuple(layout.registers[p] for p in perm), cap=layout.cap)
    if isinstance(state, PureState):
        v = state.vector.reshape(layout.dims).transpose(perm).reshape(-1)
        return PureState.unchecked(new_layout, v)
    n = len(perm)
    m = state.matrix.reshape(layout.dims + layout.dims).transpose(perm + [n + p for p in perm])
    return DensityMatrix.unchecked(new_layout, m.reshape(layout.dim, layout.dim))


def rename(state: State, mapping: dict[str, str]) -> State:
    layout = state.layout.renamed(mapping)
    if isinstance(state, PureState):
        return PureState.unchecked(layout, state.vector)
    return DensityMatrix.unchecked(layout, state.matrix)


def _check_qubits(layout: RegisterLayout, targets: Sequence[str]) -> list[int]:
    axes = _target_axes(layout, targets)
    for t, a in zip(targets, axes):
        if layout.dims[a] != 2:
            raise ValueError(f"register {t!r} is not a qubit")
    return axes


def outcome_probabilities(state: State, targets: Sequence[str]) -> np.ndarray:
    """Born-rule distribution of a computational measurement of ``targets``."""
    layout = state.layout
    axes = _check_qubits(layout, targets)
    others = [i for i in range(len(layout.dims)) if i not in axes]
    if isinstance(state, PureState):
        p = np.abs(state.vector.reshape(layout.dims)) ** 2
    else:
        p = np.real(np.diagonal(state.matrix)).reshape(layout.dims)
    p = p.transpose(axes + others).reshape(2 ** len(axes), -1).sum(axis=1)
    return np.clip(p, 0.0, None)


def _project(state: State, axes: list[int], outcome: int, discard: bool):
    layout = state.layout
    k = len(axes)
    digits = [(outcome >> (k - 1 - j)) & 1 for j in range(k)]
    idx = [slice(None)] * len(layout.dims)
    for a, d in zip(axes, digits):
        idx[a] = d if discard else slice(d, d + 1)
    new_layout = layout.without([layout.names[a] for a in axes]) if discard else layout
    if isinstance(state, PureState):
        t = state.vector.reshape(layout.dims)
        if discard:
            v = t[tuple(idx)].reshape(-1)
        else:
            v = np.zeros_like(t)
            v[tuple(idx)] = t[tuple(idx)]
            v = v.reshape(-1)
        w = float(np.vdot(v, v).real)
        return new_layout, v, w
    n = len(layout.dims)
    t = state.matrix.reshape(layout.dims + layout.dims)
    full = idx + [idx[i] for i in range(n)]
    if discard:
        m = t[tuple(full)]
        d = new_layout.dim if new_layout.registers else 1
        m = m.reshape(d, d)
    else:
        m = np.zeros_like(t)
        m[tuple(full)] = t[tuple(full)]
        m = m.reshape(layout.dim, layout.dim)
    w = float(np.real(np.trace(m)))
    return new_layout, m, w


def _wrap(state: State, layout: RegisterLayout, data: np.ndarray, weight: float):
    if isinstance(state, PureState):
        return PureState.unchecked(layout, data / np.sqrt(weight))
    return DensityMatrix.unchecked(layout, data / weight)


def measurement_branches(state: State, targets: Sequence[str], *, discard: bool = False,
                         cutoff: float = 1e-14) -> list[tuple[str, float, State | None]]:
    """All computational outcomes of ``targets`` with probabilities and post-states.

    With ``discard=True`` the measured registers are removed from the
    post-state. If nothing remains, the post-state is ``None``.
    """
    axes = _check_qubits(state.layout, targets)
    probs = outcome_probabilities(state, targets)
    out = []
    for o, p in enumerate(probs):
        if p <= cutoff:
            continue
        layout, data, w = _project(state, axes, o, discard)
        post = _wrap(state, layout, data, w) if layout.registers else None
        out.append((_bits.from_int(o, len(targets)), float(w), post))
    return out


def measure_computational(state: State, targets: Sequence[str], rng: np.random.Generator,
                          *, discard: bool = False) -> tuple[str, State | None]:
    """Sample a computational-basis measurement of the qubit ``targets``."""
    axes = _check_qubits(state.layout, targets)
    probs = outcome_probabilities(state, targets)
    total = probs.sum()
    o = int(rng.choice(len(probs), p=probs / total))
    layout, data, w = _project(state, axes, o, discard)
    if w <= 1e-300:
        raise InvariantError("measurement selected a zero-norm branch")
    post = _wrap(state, layout, data, w) if layout.registers else None
    return _bits.from_int(o, len(targets)), post


def haar_unitary(dim: int, rng: np.random.Generator) -> UnitaryOp:
    """Haar-random unitary via QR of a Ginibre matrix with phase-fixed diagonal."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryOp.unchecked(q)


def random_pure_state(layout: RegisterLayout, rng: np.random.Generator) -> PureState:
    v = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return PureState.unchecked(layout, v / np.linalg.norm(v))


def random_density(layout: RegisterLayout, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state (Ginibre ensemble of the given rank)."""
    rank = layout.dim if rank is None else rank
    g = rng.standard_normal((layout.dim, rank)) + 1j * rng.standard_normal((layout.dim, rank))
    m = g @ g.conj().T
    return DensityMatrix.unchecked(layout, m / np.trace(m).real)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def canonical_purification(sigma: DensityMatrix, purifier: str = "B") -> PureState:
    """``(sqrt(sigma) x I) sum_i |i>|i>`` with the purifier a single register."""
    m = sigma.matrix
    if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -STATE_ATOL:
        raise InvariantError("input is not positive semidefinite")
    d = sigma.layout.dim
    root = _psd_sqrt(m)
    vec = root.reshape(-1)  # (sqrt(sigma) x I) sum_i |i>|i> has amplitude sqrt(sigma)[a, i]
    layout = sigma.layout.concat(RegisterLayout.of((purifier, d)))
    return PureState.unchecked(layout, vec / np.linalg.norm(vec))


def trace_distance(rho: State, tau: State) -> float:
    if rho.layout.registers != tau.layout.registers:
        raise ValueError(f"layout mismatch: {rho.layout.names} vs {tau.layout.names}")
    diff = rho.density().matrix - tau.density().matrix
    w = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(min(1.0, 0.5 * np.abs(w).sum()))


def fidelity(rho: State, tau: State) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) tau sqrt(rho)))^2``."""
    if rho.layout.registers != tau.layout.registers:
        raise ValueError(f"layout mismatch: {rho.layout.names} vs {tau.layout.names}")
    r = _psd_sqrt(rho.density().matrix)
    inner = r @ tau.density().matrix @ r
    w = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None)
    return float(min(1.0, np.sqrt(w).sum() ** 2))


def purity_top_eigenvalue(state: State) -> float:
    return float(np.linalg.eigvalsh(state.density().matrix).max())


def dump_json(obj: State | UnitaryOp) -> str:
    """Debug dump: row-major ``[re, im]`` pairs."""
    arr = obj.vector if isinstance(obj, PureState) else obj.matrix
    payload = {"shape": list(arr.shape), "data": [[float(z.real), float(z.imag)] for z in arr.reshape(-1)]}
    if not isinstance(obj, UnitaryOp):
        payload["layout"] = [list(r) for r in obj.layout.registers]
    return json.dumps(payload)

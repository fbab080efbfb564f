"""Haar twirls over the ``B`` half of ``t`` copies of a bipartite system.

The exact twirl uses the commutant of ``U^{(x)t}``: permutation operators on
``B^{(x)t}`` and the Weingarten function (inverse of the Gram matrix of the
permutation operators). The purification channel ``sim_t`` twirls ``t``
copies of the canonical purification, whose output depends only on the
reduced state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .qstate import (
    DIM_CAP,
    DensityMatrix,
    InvariantError,
    PureState,
    RegisterLayout,
    UnitaryOp,
    canonical_purification,
    haar_unitary,
)

Perm = tuple[int, ...]
MAX_COPIES = 4


@dataclass(frozen=True)
class TwirlConfig:
    t: int
    N: int
    M: int
    epsilon: float = 1e-9

    def __post_init__(self):
        if not 1 <= self.t <= MAX_COPIES:
            raise ValueError(f"t must be in [1, {MAX_COPIES}], got {self.t}")
        if self.N < 2 or self.M < 2:
            raise ValueError("N and M must be at least 2")
        if (self.N * self.M) ** self.t > DIM_CAP:
            raise ValueError(f"(N*M)^t = {(self.N * self.M) ** self.t} exceeds dimension cap {DIM_CAP}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def layout(self) -> RegisterLayout:
        return copies_layout(self.t, self.N, self.M)


def copies_layout(t: int, N: int, M: int) -> RegisterLayout:
    """Interleaved layout ``A1, B1, ..., At, Bt``."""
    regs = []
    for j in range(1, t + 1):
        regs += [(f"A{j}", N), (f"B{j}", M)]
    return RegisterLayout(tuple(regs))


# ---------------------------------------------------------------------------
# permutations


def permutations(t: int) -> list[Perm]:
    return list(itertools.permutations(range(t)))


def compose(p: Perm, q: Perm) -> Perm:
    """``(p o q)(k) = p(q(k))``."""
    return tuple(p[q[k]] for k in range(len(q)))


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for k, v in enumerate(p):
        inv[v] = k
    return tuple(inv)


def cycle_count(p: Perm) -> int:
    seen = [False] * len(p)
    cycles = 0
    for start in range(len(p)):
        if not seen[start]:
            cycles += 1
            k = start
            while not seen[k]:
                seen[k] = True
                k = p[k]
    return cycles


def cycle_type(p: Perm) -> tuple[int, ...]:
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if not seen[start]:
            n, k = 0, start
            while not seen[k]:
                seen[k] = True
                k = p[k]
                n += 1
            lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


@dataclass(frozen=True, eq=False)
class PermOperator:
    """``P_perm`` on ``(C^d)^{(x)t}``: tensor slot ``k`` moves to slot ``perm[k]``."""

    perm: Perm
    d: int
    matrix: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, perm: Perm, d: int) -> "PermOperator":
        return cls(tuple(perm), d, _perm_matrix(tuple(perm), d))


@lru_cache(maxsize=None)
def _perm_matrix(perm: Perm, d: int) -> np.ndarray:
    t = len(perm)
    dim = d**t
    idx = np.arange(dim).reshape((d,) * t)
    # output slot perm[k] holds input slot k
    moved = np.moveaxis(idx, list(range(t)), list(perm)).reshape(-1)
    P = np.zeros((dim, dim))
    P[np.arange(dim), moved] = 1.0
    P.setflags(write=False)
    return P


def perm_matrix(perm: Perm, d: int) -> np.ndarray:
    return _perm_matrix(tuple(perm), d)


# ---------------------------------------------------------------------------
# Weingarten calculus


def gram_matrix(t: int, d: int) -> np.ndarray:
    """``G[p, q] = d^{#cycles(p q^-1)}`` over ``S_t`` in :func:`permutations` order."""
    perms = permutations(t)
    return np.array([[float(d) ** cycle_count(compose(p, inverse(q))) for q in perms] for p in perms])


@dataclass(frozen=True)
class WeingartenTable:
    t: int
    d: int
    coefficients: dict[Perm, float]

    def __call__(self, perm: Perm) -> float:
        return self.coefficients[tuple(perm)]

    def matrix(self) -> np.ndarray:
        """``W[p, q] = Wg(p q^-1)``; equals the inverse Gram matrix."""
        perms = permutations(self.t)
        return np.array([[self(compose(p, inverse(q))) for q in perms] for p in perms])


class SingularGramError(InvariantError):
    pass


@lru_cache(maxsize=None)
def weingarten(t: int, d: int, allow_singular: bool = False) -> WeingartenTable:
    """Weingarten coefficients ``Wg(p, d)``.

    For ``d < t`` the permutation operators are linearly dependent and the
    Gram matrix is singular. ``allow_singular=True`` then returns the
    pseudo-inverse coefficients, which still reproduce the twirl exactly
    because ``G c = b`` stays consistent on the span of the operators.
    """
    G = gram_matrix(t, d)
    singular = np.linalg.matrix_rank(G) < G.shape[0]
    if singular and not allow_singular:
        raise SingularGramError(f"Gram matrix for t={t}, d={d} is singular (d < t)")
    Ginv = np.linalg.pinv(G) if singular else np.linalg.inv(G)
    perms = permutations(t)
    e = perms.index(tuple(range(t)))
    return WeingartenTable(t, d, {p: float(Ginv[i, e]) for i, p in enumerate(perms)})


# ---------------------------------------------------------------------------
# twirls


def _check_layout(X: DensityMatrix, cfg: TwirlConfig) -> None:
    if X.layout.dims != tuple([cfg.N, cfg.M] * cfg.t):
        raise ValueError(f"layout dims {X.layout.dims} do not match (A, B)^t with N={cfg.N}, M={cfg.M}, t={cfg.t}")


def _grouped(X: np.ndarray, cfg: TwirlConfig) -> np.ndarray:
    """Reshape an interleaved operator to ``(A^t, B^t, A^t, B^t)`` blocks."""
    t, N, M = cfg.t, cfg.N, cfg.M
    T = X.reshape([N, M] * t * 2)
    A = [2 * j for j in range(t)]
    B = [2 * j + 1 for j in range(t)]
    perm = A + B + [2 * t + a for a in A] + [2 * t + b for b in B]
    return T.transpose(perm).reshape(N**t, M**t, N**t, M**t)


def _ungrouped(T: np.ndarray, cfg: TwirlConfig) -> np.ndarray:
    t, N, M = cfg.t, cfg.N, cfg.M
    T = T.reshape([N] * t + [M] * t + [N] * t + [M] * t)
    # inverse of the grouping permutation
    A = [2 * j for j in range(t)]
    B = [2 * j + 1 for j in range(t)]
    fwd = A + B + [2 * t + a for a in A] + [2 * t + b for b in B]
    inv = np.argsort(fwd)
    d = (N * M) ** t
    return T.transpose(inv).reshape(d, d)


def exact_twirl_B(X: DensityMatrix, cfg: TwirlConfig) -> DensityMatrix:
    """``E_U[(I x U)^{(x)t} X (I x U^dag)^{(x)t}]`` in closed form."""
    _check_layout(X, cfg)
    perms = permutations(cfg.t)
    wg = weingarten(cfg.t, cfg.M, allow_singular=True)
    X4 = _grouped(X.matrix, cfg)
    # b_p = Tr_B[(I x P_p^dag) X]
    blocks = {p: np.einsum("aibj,ij->ab", X4, perm_matrix(p, cfg.M)) for p in perms}
    out = np.zeros_like(X4)
    for q in perms:
        c = sum(wg(compose(q, inverse(p))) * blocks[p] for p in perms)
        out += np.einsum("ab,ij->aibj", c, perm_matrix(q, cfg.M))
    return DensityMatrix.unchecked(X.layout, _ungrouped(out, cfg))


def _copies_unitary(U: np.ndarray, cfg: TwirlConfig) -> np.ndarray:
    one = np.kron(np.eye(cfg.N), U)
    W = one
    for _ in range(cfg.t - 1):
        W = np.kron(W, one)
    return W


def mc_twirl_B(X: DensityMatrix, cfg: TwirlConfig, samples: int, rng: np.random.Generator,
               sampler: Callable[[int, np.random.Generator], UnitaryOp] = haar_unitary) -> DensityMatrix:
    """Empirical mean of conjugations by sampled ``(I x U)^{(x)t}``."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    _check_layout(X, cfg)
    acc = np.zeros_like(X.matrix)
    for _ in range(samples):
        W = _copies_unitary(sampler(cfg.M, rng).matrix, cfg)
        acc += W @ X.matrix @ W.conj().T
    return DensityMatrix.unchecked(X.layout, acc / samples)


def purification(sigma: DensityMatrix, M: int, purifier: str = "B") -> PureState:
    """A purification of ``sigma`` with a purifier of dimension ``M``.

    ``M == dim(sigma)`` gives the canonical purification; other sizes use
    the eigen-decomposition and need ``M >= rank(sigma)``.
    """
    N = sigma.layout.dim
    if M == N:
        return canonical_purification(sigma, purifier)
    w, v = np.linalg.eigh(sigma.matrix)
    keep = w > 1e-12
    rank = int(keep.sum())
    if M < rank:
        raise ValueError(f"purifier dimension M={M} is smaller than rank(sigma)={rank}")
    vec = np.zeros((N, M), dtype=complex)
    for j, i in enumerate(np.flatnonzero(keep)):
        vec[:, j] = np.sqrt(w[i]) * v[:, i]
    layout = sigma.layout.concat(RegisterLayout.of((purifier, M)))
    return PureState.unchecked(layout, vec.reshape(-1) / np.linalg.norm(vec))


def copies(phi: PureState, t: int) -> DensityMatrix:
    """``|phi><phi|^{(x)t}`` on the interleaved ``A1, B1, ...`` layout."""
    N, M = phi.layout.dims if len(phi.layout.dims) == 2 else (None, None)
    if N is None:
        raise ValueError("copies expects a bipartite (A, B) state")
    rho = np.outer(phi.vector, phi.vector.conj())
    out = rho
    for _ in range(t - 1):
        out = np.kron(out, rho)
    return DensityMatrix.unchecked(copies_layout(t, N, M), out)


def sim_t(sigma: DensityMatrix, cfg: TwirlConfig) -> DensityMatrix:
    """Purification channel: twirled copies of a purification of ``sigma``."""
    if sigma.layout.dim != cfg.N:
        raise ValueError(f"sigma has dimension {sigma.layout.dim}, expected N={cfg.N}")
    flat = DensityMatrix.unchecked(RegisterLayout.of(("A", cfg.N)), sigma.matrix)
    phi = purification(flat, cfg.M)
    return exact_twirl_B(copies(phi, cfg.t), cfg)

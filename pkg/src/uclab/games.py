"""Security games, adversary strategies, the expansion reduction and statistics.

Every trial draws its own streams from ``(seed, trial, role)`` so trials are
independent and order does not matter. Cloning adversaries follow a
register-passing protocol: ``choose`` runs with an encryption oracle,
``split`` maps the challenge to one part per party, and ``decide`` is run
separately for each party with the decryption key. Parts may not share a
quantum object.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import bits
from .compilers import (
    ExpandedCiphertext,
    ExpandedDk,
    ExpandedScheme,
    SeededPureCiphertext,
    build_stack,
    stack_config,
)
from .dqre import EncodedCircuit, ucbit_decode_circuit
from .garble import GarbleError
from .qstate import H, DensityMatrix, PureState, apply, measure_computational, rename
from .rng import stream
from .scheme import ConfigError, Scheme
from .symcrypto import ClassicalCiphertext, NonceSke
from .ucbit import ConjugateCodingBit, UcbitKey

Z95 = 1.959963984540054
GAMES = ("ind", "pr", "clone", "idclone")

# stream roles inside a trial
_KEY, _ORACLE, _CHALLENGE, _ADV, _COIN = 0, 1, 2, 3, 4
_PARTY = 100


class ProtocolViolation(ValueError):
    """The adversary broke the game interface (message length, split layout)."""


# ---------------------------------------------------------------------------
# statistics


def wilson_interval(wins: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("need at least one trial")
    p = wins / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    if wins == 0:
        lo = 0.0
    if wins == trials:
        hi = 1.0
    return lo, hi


@dataclass(frozen=True)
class GameStats:
    wins: int
    trials: int
    estimate: float
    ci: tuple[float, float]
    seed: int

    @property
    def half_width(self) -> float:
        return (self.ci[1] - self.ci[0]) / 2

    def contains(self, p: float) -> bool:
        return self.ci[0] <= p <= self.ci[1]

    def to_json(self) -> dict:
        return {"wins": self.wins, "trials": self.trials, "estimate": self.estimate,
                "ci": [self.ci[0], self.ci[1]], "seed": self.seed}


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    b: int
    guesses: tuple[int, ...]
    win: bool


def stats_aggregate(transcripts: Sequence[TrialRecord], seed: int = 0) -> GameStats:
    if not transcripts:
        raise ValueError("need at least one transcript")
    wins = sum(1 for t in transcripts if t.win)
    n = len(transcripts)
    return GameStats(wins, n, wins / n, wilson_interval(wins, n), seed)


def stats_from_counts(wins: int, trials: int, seed: int = 0) -> GameStats:
    return GameStats(wins, trials, wins / trials, wilson_interval(wins, trials), seed)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class GameConfig:
    game: str
    t: int = 1
    t_prime: int = 2
    trials: int = 1000
    seed: int = 0
    stack: dict = field(default_factory=dict)
    layer: str | None = None
    degenerate: bool = False

    def __post_init__(self):
        if self.game not in GAMES:
            raise ConfigError(f"game: unknown game {self.game!r}; expected one of {GAMES}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials: must be an integer >= 1")
        if self.t < 1 or self.t_prime < 1:
            raise ConfigError("t, t_prime: must be >= 1")
        if self.game in ("clone", "idclone") and not self.t < self.t_prime and not self.degenerate:
            raise ConfigError(f"t_prime: cloning games need t < t_prime (got t={self.t}, t_prime={self.t_prime})")

    def scheme(self) -> Scheme:
        layers = build_stack(self.stack)
        name = self.layer or stack_config(self.stack)["compiler"]
        if name == "none":
            name = "ucbit"
        if name not in layers:
            raise ConfigError(f"layer: stack has no layer {name!r} (available: {sorted(layers)})")
        return layers[name]


class EncOracle:
    """Encryption oracle handle; counts queries."""

    def __init__(self, scheme: Scheme, ek, rng):
        self._scheme, self._ek, self._rng = scheme, ek, rng
        self.queries = 0

    def __call__(self, m: str):
        self._scheme.check_message(m)
        self.queries += 1
        return self._scheme.enc(self._ek, m, self._rng)


# ---------------------------------------------------------------------------
# quantum object bookkeeping


def quantum_objects(obj) -> list:
    """Every quantum object reachable from a challenge part."""
    if isinstance(obj, (PureState, DensityMatrix, SeededPureCiphertext)):
        return [obj]
    if isinstance(obj, ExpandedCiphertext):
        return obj.quantum_objects()
    if isinstance(obj, EncodedCircuit):
        return obj.quantum_objects()
    if isinstance(obj, dict):
        return [q for v in obj.values() for q in quantum_objects(v)]
    if isinstance(obj, (list, tuple)):
        return [q for v in obj for q in quantum_objects(v)]
    return []


def check_split(parts, t_prime: int) -> None:
    if not isinstance(parts, (list, tuple)) or len(parts) != t_prime:
        raise ProtocolViolation(f"splitter must return {t_prime} parts")
    owner: dict[int, int] = {}
    for i, part in enumerate(parts):
        for q in quantum_objects(part):
            j = owner.setdefault(id(q), i)
            if j != i:
                raise ProtocolViolation(f"splitter layout violation: parties {j} and {i} share a quantum register")


def measure_all(obj, rng):
    """Measure every quantum object in the computational basis; returns a classical snapshot."""
    if isinstance(obj, (PureState, DensityMatrix)):
        return ("basis", obj.layout, measure_computational(obj, list(obj.layout.names), rng)[0])
    if isinstance(obj, SeededPureCiphertext):
        return ("seeded", obj)
    if isinstance(obj, ExpandedCiphertext):
        chat = obj.chat
        if isinstance(chat, EncodedCircuit):
            res = tuple(tuple(measure_all(s, rng) for s in pair) for pair in chat.resources)
        else:
            res = chat
        return ("expanded", measure_all(obj.qlabels, rng), res, chat, obj.grid)
    if isinstance(obj, (list, tuple)):
        return ("seq", [measure_all(v, rng) for v in obj])
    return ("classical", obj)


def prepare(snapshot, rng=None):
    """Fresh quantum objects re-prepared from a classical snapshot."""
    kind = snapshot[0]
    if kind == "basis":
        return PureState.basis(snapshot[1], snapshot[2])
    if kind == "seeded":
        return snapshot[1]
    if kind == "expanded":
        _, q, res, chat, grid = snapshot
        if isinstance(chat, EncodedCircuit):
            chat = EncodedCircuit(chat.garbled, tuple(tuple(prepare(s) for s in pair) for pair in res),
                                  chat.wiring, chat.p_wires, chat.size)
        return ExpandedCiphertext(chat, prepare(q), grid)
    if kind == "seq":
        return [prepare(s) for s in snapshot[1]]
    return snapshot[1]


def message_bit(m: str, m0: str, m1: str, rng) -> int:
    if m == m1 and m != m0:
        return 1
    if m == m0 and m != m1:
        return 0
    return int(rng.integers(0, 2))


def honest_bit(scheme: Scheme, dk, ct, m0: str, m1: str, rng) -> int:
    """Decrypt and map the plaintext onto the challenge bit (random if decryption fails)."""
    try:
        m = scheme.dec(dk, ct, rng)
    except (GarbleError, ValueError):
        return int(rng.integers(0, 2))
    return message_bit(m, m0, m1, rng)


# ---------------------------------------------------------------------------
# cloning strategies


class CloneStrategy:
    name = "strategy"

    def peek(self, dk) -> None:
        """Hybrid-experiment hook: the challenger's key, before the game starts."""

    def messages(self, scheme: Scheme) -> tuple[str, str]:
        L = scheme.message_length
        return bits.zeros(L), "1" * L

    def choose(self, scheme: Scheme, oracle, rng):
        m0, m1 = self.messages(scheme)
        return m0, m1, {"m0": m0, "m1": m1, "coin": int(rng.integers(0, 2))}

    def split(self, scheme, challenge: list, st, oracle, rng, t_prime: int) -> list:
        raise NotImplementedError

    def decide(self, scheme, i: int, dk, part, rng) -> int:
        raise NotImplementedError


class GuessStrategy(CloneStrategy):
    """Parties output one shared random bit chosen before the challenge."""

    name = "guess"

    def split(self, scheme, challenge, st, oracle, rng, t_prime):
        return [{"coin": st["coin"]} for _ in range(t_prime)]

    def decide(self, scheme, i, dk, part, rng):
        return part["coin"]


class CopyStrategy(CloneStrategy):
    """Measure everything in the computational basis and hand each party a re-prepared copy."""

    name = "copy"

    def split(self, scheme, challenge, st, oracle, rng, t_prime):
        snap = measure_all(challenge, rng)
        return [{"ct": prepare(snap), "m0": st["m0"], "m1": st["m1"]} for _ in range(t_prime)]

    def decide(self, scheme, i, dk, part, rng):
        return honest_bit(scheme, dk, part["ct"][0], part["m0"], part["m1"], rng)


class HonestFirstStrategy(CloneStrategy):
    """Party 0 receives the challenge and decrypts; the others output the shared coin."""

    name = "honest-first"
    flip = 0.0

    def split(self, scheme, challenge, st, oracle, rng, t_prime):
        parts = [{"ct": challenge, **st}]
        parts += [{"coin": st["coin"]} for _ in range(t_prime - 1)]
        return parts

    def decide(self, scheme, i, dk, part, rng):
        if "ct" not in part:
            return part["coin"]
        b = honest_bit(scheme, dk, part["ct"][0], part["m0"], part["m1"], rng)
        if self.flip and rng.random() < self.flip:
            b ^= 1
        return b


class NoisyHonestFirstStrategy(HonestFirstStrategy):
    name = "noisy-honest-first"
    flip = 0.25


class HonestDecryptor(HonestFirstStrategy):
    """Degenerate single-party variant: decrypt with the key."""

    name = "honest"


class Bb84BroadcastStrategy(CloneStrategy):
    """Measure each qubit in a random basis, broadcast bases and outcomes; parties decode from them."""

    name = "bb84-broadcast"

    def split(self, scheme, challenge, st, oracle, rng, t_prime):
        if not isinstance(scheme, ConjugateCodingBit):
            raise ConfigError("strategy: bb84-broadcast targets the conjugate-coding bit directly")
        ct = challenge[0]
        basis = bits.random_bits(rng, scheme.n)
        for name, th in zip(ct.layout.names, basis):
            if th == "1":
                ct = apply(H, ct, [name])
        z, _ = measure_computational(ct, list(ct.layout.names), rng)
        return [{"basis": basis, "z": z} for _ in range(t_prime)]

    def decide(self, scheme, i, dk, part, rng):
        return bits.parity(part["z"]) ^ bits.parity(dk.s)

    @staticmethod
    def exact_win_probability(n: int) -> float:
        """Born-rule win probability by enumerating keys, bits, bases and outcomes."""
        from .qstate import outcome_probabilities

        scheme = ConjugateCodingBit(n)
        total = 0.0
        weight = 1.0 / (4**n * 2 * 2**n)
        for theta in bits.all_strings(n):
            for s in bits.all_strings(n):
                key = UcbitKey(theta, s)
                for b in (0, 1):
                    rho = scheme.channel(key, str(b))
                    for basis in bits.all_strings(n):
                        st = rho
                        for name, th in zip(scheme.names, basis):
                            if th == "1":
                                st = apply(H, st, [name])
                        probs = outcome_probabilities(st, scheme.names)
                        for o, p in enumerate(probs):
                            guess = bits.parity(bits.from_int(o, n)) ^ bits.parity(s)
                            if guess == b:
                                total += weight * p
        return total


STRATEGIES: dict[str, type[CloneStrategy]] = {
    cls.name: cls
    for cls in (GuessStrategy, CopyStrategy, HonestFirstStrategy, NoisyHonestFirstStrategy,
                HonestDecryptor, Bb84BroadcastStrategy)
}

# strategies meaningful against any scheme (used by the reduction and CLI defaults)
SHIPPED = ("guess", "copy", "honest-first", "noisy-honest-first")


def make_strategy(name: str) -> CloneStrategy:
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise ConfigError(f"strategy: unknown strategy {name!r}; expected one of {sorted(STRATEGIES)}") from None


# ---------------------------------------------------------------------------
# cloning games


def _play_clone(cfg: GameConfig, strategy: CloneStrategy, scheme: Scheme, trial: int, identical: bool,
                hybrid_peek: bool) -> TrialRecord:
    seed = cfg.seed
    ek, dk = scheme.gen(stream(seed, trial, _KEY))
    if hybrid_peek:
        strategy.peek(dk)
    oracle = EncOracle(scheme, ek, stream(seed, trial, _ORACLE))
    adv = stream(seed, trial, _ADV)
    m0, m1, st = strategy.choose(scheme, oracle, adv)
    for m in (m0, m1):
        try:
            scheme.check_message(m)
        except ValueError as e:
            raise ProtocolViolation(f"adversary message rejected: {e}") from None
    b = int(stream(seed, trial, _COIN).integers(0, 2))
    mb = m1 if b else m0
    ch_rng = stream(seed, trial, _CHALLENGE)
    if identical:
        r = scheme.sample_randomness(ch_rng)
        challenge = [scheme.enc_with(ek, mb, r) for _ in range(cfg.t)]
    else:
        challenge = [scheme.enc(ek, mb, ch_rng) for _ in range(cfg.t)]
    parts = strategy.split(scheme, challenge, st, oracle, adv, cfg.t_prime)
    check_split(parts, cfg.t_prime)
    guesses = tuple(int(strategy.decide(scheme, i, dk, parts[i], stream(seed, trial, _PARTY + i)))
                    for i in range(cfg.t_prime))
    return TrialRecord(trial, b, guesses, all(g == b for g in guesses))


def play_trials(cfg: GameConfig, strategy: CloneStrategy, *, hybrid_peek: bool = False,
                scheme: Scheme | None = None) -> list[TrialRecord]:
    scheme = scheme if scheme is not None else cfg.scheme()
    identical = cfg.game == "idclone"
    if identical and not getattr(scheme, "pure", False):
        raise ConfigError(f"scheme {scheme.name!r} is not pure; identical-copy game needs a pure scheme")
    return [_play_clone(cfg, strategy, scheme, k, identical, hybrid_peek) for k in range(cfg.trials)]


def run_clone(cfg: GameConfig, strategy: CloneStrategy, *, hybrid_peek: bool = False,
              scheme: Scheme | None = None) -> GameStats:
    if cfg.game != "clone":
        cfg = GameConfig("clone", cfg.t, cfg.t_prime, cfg.trials, cfg.seed, cfg.stack, cfg.layer, cfg.degenerate)
    return stats_aggregate(play_trials(cfg, strategy, hybrid_peek=hybrid_peek, scheme=scheme), cfg.seed)


def run_idclone(cfg: GameConfig, strategy: CloneStrategy, *, scheme: Scheme | None = None) -> GameStats:
    if cfg.game != "idclone":
        cfg = GameConfig("idclone", cfg.t, cfg.t_prime, cfg.trials, cfg.seed, cfg.stack, cfg.layer, cfg.degenerate)
    return stats_aggregate(play_trials(cfg, strategy, scheme=scheme), cfg.seed)


# ---------------------------------------------------------------------------
# reduction from the expanded scheme to the one-bit scheme


class ReductionWrapper(CloneStrategy):
    """Turns a strategy against ``ExpandedScheme`` into one against its one-bit base.

    The wrapper generates its own grid of SKE keys, answers encryption
    queries by garbling the constant circuit and encrypting labels for both
    key-bit values, embeds each received one-bit ciphertext as the quantum
    input of a garbled decode circuit, and hands every party all grid keys.
    ``hybrid=True`` replaces the unselected grid entries by encryptions of
    zeros; it needs the challenger key through :meth:`peek`.
    """

    def __init__(self, inner: CloneStrategy, expanded: ExpandedScheme, *, hybrid: bool = False):
        self.inner = inner
        self.expanded = expanded
        self.hybrid = hybrid
        self.name = f"wrap({inner.name})"
        self._dk1 = None

    def peek(self, dk) -> None:
        self._dk1 = dk

    def messages(self, scheme):
        return "0", "1"

    def _check_base(self, scheme: Scheme):
        base = self.expanded.base
        if type(scheme) is not type(base) or getattr(scheme, "n", None) != base.n:
            raise ConfigError(f"reduction wraps an expanded scheme over {base.name}(n={base.n}), "
                              f"but the game scheme is {scheme.name}(n={getattr(scheme, 'n', None)})")

    def _grid(self, bundle, grid_keys, rng) -> tuple[tuple[str, str], ...]:
        E = self.expanded
        kb = E.dk1_bits(self._dk1) if self.hybrid else None
        grid = []
        for i in range(E.ell):
            row = []
            for b in (0, 1):
                lab = E.dqre.label_c(i, b, bundle.r)
                if kb is not None and b != int(kb[i]):
                    lab = bits.zeros(len(lab))
                row.append(E.ske.enc(grid_keys[i][b], lab, rng).bits)
            grid.append(tuple(row))
        return tuple(grid)

    def _sim_oracle(self, st):
        E = self.expanded

        def oracle(m: str):
            E.check_message(m)
            rng = st["rng"]
            bundle, q = E.encode(E.constant_circuit(m), E.zero_input(), rng)
            return ExpandedCiphertext(bundle.circuit, q, self._grid(bundle, st["grid_keys"], rng))

        return oracle

    def choose(self, scheme, oracle, rng):
        self._check_base(scheme)
        if self.hybrid and self._dk1 is None:
            raise ConfigError("hybrid reduction needs the challenger key (run with hybrid_peek=True)")
        E = self.expanded
        grid_keys = tuple((E.ske.gen(rng)[0], E.ske.gen(rng)[0]) for _ in range(E.ell))
        st = {"grid_keys": grid_keys, "rng": rng}
        m0, m1, inner_st = self.inner.choose(E, self._sim_oracle(st), rng)
        st.update(m0=m0, m1=m1, inner=inner_st)
        return "0", "1", st

    def split(self, scheme, challenge, st, oracle, rng, t_prime):
        E = self.expanded
        D = ucbit_decode_circuit(E.base, st["m0"], st["m1"])
        cts = []
        for rho in challenge:
            q = rename(rho, {c: f"q{i}" for i, c in enumerate(rho.layout.names)})
            bundle, qlabels = E.encode(D, q, rng)
            cts.append(ExpandedCiphertext(bundle.circuit, qlabels, self._grid(bundle, st["grid_keys"], rng)))
        parts = self.inner.split(E, cts, st["inner"], self._sim_oracle(st), rng, t_prime)
        return [{"inner": p, "grid_keys": st["grid_keys"]} for p in parts]

    def decide(self, scheme, i, dk, part, rng):
        E = self.expanded
        kb = E.dk1_bits(dk)
        keys = part["grid_keys"]
        dk_lm = ExpandedDk(tuple(keys[j][int(kb[j])] for j in range(E.ell)), dk)
        return self.inner.decide(E, i, dk_lm, part["inner"], rng)


def reduction_wrap(strategy_lm: CloneStrategy, expanded: ExpandedScheme, *, hybrid: bool = False) -> ReductionWrapper:
    return ReductionWrapper(strategy_lm, expanded, hybrid=hybrid)


@dataclass(frozen=True)
class PairedResult:
    strategy: str
    direct: GameStats
    wrapped: GameStats

    @property
    def difference(self) -> float:
        return self.wrapped.estimate - self.direct.estimate

    @property
    def agree(self) -> bool:
        return abs(self.difference) <= self.direct.half_width + self.wrapped.half_width

    def to_json(self) -> dict:
        return {"strategy": self.strategy, "direct": self.direct.to_json(), "wrapped": self.wrapped.to_json(),
                "difference": self.difference, "agree": self.agree}


def paired_reduction(cfg: GameConfig, strategy_name: str, *, hybrid: bool = False) -> PairedResult:
    """Direct expanded-scheme game and reduction-wrapped one-bit game for one strategy."""
    layers = build_stack({**cfg.stack, "compiler": "expand"})
    expanded, base = layers["expand"], layers["ucbit"]
    direct = run_clone(cfg, make_strategy(strategy_name), scheme=expanded)
    wrapped_cfg = GameConfig("clone", cfg.t, cfg.t_prime, cfg.trials, cfg.seed + 1, cfg.stack, "ucbit", cfg.degenerate)
    wrapper = reduction_wrap(make_strategy(strategy_name), expanded, hybrid=hybrid)
    wrapped = run_clone(wrapped_cfg, wrapper, scheme=base, hybrid_peek=hybrid)
    return PairedResult(strategy_name, direct, wrapped)


# ---------------------------------------------------------------------------
# classical IND and PR games


class IndAdversary:
    name = "ind-adversary"

    def choose(self, scheme, oracle, rng):
        L = scheme.message_length
        return bits.zeros(L), "1" * L, {}

    def guess(self, scheme, ct, st, oracle, rng) -> int:
        raise NotImplementedError


class GuessAdversary(IndAdversary):
    name = "guess"

    def guess(self, scheme, ct, st, oracle, rng):
        return int(rng.integers(0, 2))


class FirstBitAdversary(IndAdversary):
    """Guess the first body bit of the ciphertext."""

    name = "first-bit"

    def guess(self, scheme, ct, st, oracle, rng):
        return int(_ct_bits(ct)[-scheme.message_length])


class ParityAdversary(IndAdversary):
    name = "parity"

    def guess(self, scheme, ct, st, oracle, rng):
        return bits.parity(_ct_bits(ct))


class NonceReuseAdversary(IndAdversary):
    """Query the oracle on ``m0`` several times; if a nonce repeats the challenge's, compare bodies."""

    name = "nonce-reuse"
    queries = 8

    def choose(self, scheme, oracle, rng):
        m0, m1, _ = super().choose(scheme, oracle, rng)
        return m0, m1, {"seen": [oracle(m0) for _ in range(self.queries)], "m0": m0}

    def guess(self, scheme, ct, st, oracle, rng):
        for q in st["seen"]:
            if isinstance(q, ClassicalCiphertext) and isinstance(ct, ClassicalCiphertext) and q.nonce == ct.nonce:
                return int(q.body != ct.body)
        return int(rng.integers(0, 2))


class KeyDecryptAdversary(IndAdversary):
    """Against the key-leaking double: read the key off the ciphertext and decrypt."""

    name = "key-decrypt"

    def guess(self, scheme, ct, st, oracle, rng):
        key, inner = ct
        return int(scheme.inner.dec(key, inner) == "1" * scheme.message_length)


class StructureAdversary(IndAdversary):
    """PR distinguisher: a real ciphertext of the structured double ends in zeros."""

    name = "structure"

    def choose(self, scheme, oracle, rng):
        return "1" * scheme.message_length, None, {}

    def guess(self, scheme, ct, st, oracle, rng):
        s = _ct_bits(ct)
        return int(s[-scheme.pad:] != bits.zeros(scheme.pad))


IND_ADVERSARIES = {cls.name: cls for cls in (GuessAdversary, FirstBitAdversary, ParityAdversary,
                                             NonceReuseAdversary, KeyDecryptAdversary, StructureAdversary)}
IND_BATTERY = ("first-bit", "parity", "nonce-reuse")


def _ct_bits(ct) -> str:
    if isinstance(ct, ClassicalCiphertext):
        return ct.bits
    if isinstance(ct, str):
        return ct
    raise ProtocolViolation(f"classical game received a non-classical ciphertext {type(ct).__name__}")


class KeyLeakingSke(Scheme):
    """Broken test double: the ciphertext carries the key."""

    name = "key-leaking"

    def __init__(self, inner: NonceSke):
        self.inner = inner
        self.message_length = inner.message_length

    def gen(self, rng):
        return self.inner.gen(rng)

    def enc(self, ek, m, rng):
        return (ek, self.inner.enc(ek, m, rng))

    def dec(self, dk, ct, rng=None):
        return self.inner.dec(dk, ct[1])


class StructuredSke(Scheme):
    """Non-pseudorandom test double: ``ct = Enc(m) || 0^pad``."""

    name = "structured"

    def __init__(self, inner: NonceSke, pad: int = 8):
        self.inner = inner
        self.pad = pad
        self.message_length = inner.message_length
        self.ct_length = inner.ct_length + pad

    def gen(self, rng):
        return self.inner.gen(rng)

    def enc(self, ek, m, rng):
        return self.inner.enc(ek, m, rng).bits + bits.zeros(self.pad)

    def dec(self, dk, ct, rng=None):
        return self.inner.dec(dk, ct[: -self.pad])


def run_ind(cfg: GameConfig, adversary: IndAdversary, scheme: Scheme | None = None) -> GameStats:
    scheme = scheme if scheme is not None else NonceSke(**_ske_args(cfg))
    records = []
    for k in range(cfg.trials):
        ek, _ = scheme.gen(stream(cfg.seed, k, _KEY))
        oracle = EncOracle(scheme, ek, stream(cfg.seed, k, _ORACLE))
        adv = stream(cfg.seed, k, _ADV)
        m0, m1, st = adversary.choose(scheme, oracle, adv)
        for m in (m0, m1):
            if len(m) != scheme.message_length:
                raise ProtocolViolation(f"message {m!r} has the wrong length")
        b = int(stream(cfg.seed, k, _COIN).integers(0, 2))
        ct = scheme.enc(ek, m1 if b else m0, stream(cfg.seed, k, _CHALLENGE))
        g = int(adversary.guess(scheme, ct, st, oracle, adv))
        records.append(TrialRecord(k, b, (g,), g == b))
    return stats_aggregate(records, cfg.seed)


def run_pr(cfg: GameConfig, adversary: IndAdversary, scheme: Scheme | None = None) -> GameStats:
    """``b = 0``: real ciphertext of the chosen message; ``b = 1``: a uniform string of the same length."""
    scheme = scheme if scheme is not None else NonceSke(**_ske_args(cfg))
    ct_len = getattr(scheme, "ct_length", None)
    if not isinstance(ct_len, int):
        raise ConfigError(f"scheme {scheme.name!r} has no fixed classical ciphertext length")
    records = []
    for k in range(cfg.trials):
        ek, _ = scheme.gen(stream(cfg.seed, k, _KEY))
        oracle = EncOracle(scheme, ek, stream(cfg.seed, k, _ORACLE))
        adv = stream(cfg.seed, k, _ADV)
        m, _, st = adversary.choose(scheme, oracle, adv)
        if len(m) != scheme.message_length:
            raise ProtocolViolation(f"message {m!r} has the wrong length")
        b = int(stream(cfg.seed, k, _COIN).integers(0, 2))
        ch = stream(cfg.seed, k, _CHALLENGE)
        ct = bits.random_bits(ch, ct_len) if b else scheme.enc(ek, m, ch)
        g = int(adversary.guess(scheme, ct, st, oracle, adv))
        records.append(TrialRecord(k, b, (g,), g == b))
    return stats_aggregate(records, cfg.seed)


def _ske_args(cfg: GameConfig) -> dict:
    ske = stack_config(cfg.stack)["ske"]
    return {"lam": ske.get("lambda", 16), "l_m": ske.get("message_length", 8)}


# ---------------------------------------------------------------------------
# reports


def game_report(cfg: GameConfig, stats: GameStats, scheme: Scheme, strategy: str) -> dict:
    return {"game": cfg.game, "t": cfg.t, "t_prime": cfg.t_prime, "trials": stats.trials, "wins": stats.wins,
            "estimate": stats.estimate, "ci": [stats.ci[0], stats.ci[1]], "seed": stats.seed,
            "strategy": strategy, "scheme": scheme.describe()}


def transcripts_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "b", "guesses", "win"])
    for r in records:
        w.writerow([r.trial, r.b, "".join(map(str, r.guesses)), int(r.win)])
    return buf.getvalue()


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)

"""``uclab`` command line: round-trip checks, twirl verification and security games.

Exit codes: 0 success, 2 configuration error, 3 runtime check failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bits
from .compilers import build_stack, stack_config
from .games import IND_ADVERSARIES, GameConfig, ProtocolViolation, game_report, make_strategy, \
    paired_reduction, play_trials, run_ind, run_pr, stats_aggregate, transcripts_csv
from .qstate import DensityMatrix, InvariantError, RegisterLayout, apply, haar_unitary, random_density, \
    tensor, trace_distance
from .rng import stream
from .scheme import ConfigError
from .twirl import TwirlConfig, copies, exact_twirl_B, mc_twirl_B, purification, sim_t

CONFIG_VERSION = 1
REPORT_VERSION = 1
EXACT_TOL = 1e-8
COMMANDS = ("roundtrip", "verify-twirl", "run-game")
TOP_LEVEL = {"version", "command", "seed", "stack", "game", "twirl", "roundtrip"}


class CheckFailure(RuntimeError):
    """A runtime assertion of an experiment failed."""


def load_config(path: str | None) -> dict:
    if path is None:
        return {"version": CONFIG_VERSION}
    try:
        cfg = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config: file {path!r} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON ({e})") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config: top level must be a JSON object")
    if cfg.get("version") != CONFIG_VERSION:
        raise ConfigError(f"version: expected {CONFIG_VERSION}, got {cfg.get('version')!r}")
    unknown = set(cfg) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level field")
    for key in ("stack", "game", "twirl", "roundtrip"):
        if key in cfg and not isinstance(cfg[key], dict):
            raise ConfigError(f"{key}: must be an object")
    build_stack(cfg.get("stack"))


# ---------------------------------------------------------------------------
# commands


def _message_list(L: int, limit: int = 4) -> list[str]:
    return bits.all_strings(L)[:limit] if L <= 2 else [bits.zeros(L), "1" * L]


def cmd_roundtrip(cfg: dict, seed: int, trials: int | None = None, exact: bool = False) -> dict:
    rt = cfg.get("roundtrip", {})
    keys = trials if trials is not None else rt.get("keys", 2)
    if not isinstance(keys, int) or keys < 1:
        raise ConfigError("roundtrip.keys: expected an integer >= 1")
    stack_cfg = cfg.get("stack")
    layers = build_stack(stack_cfg)
    corrupt = bool((stack_cfg or {}).get("corrupt_keys", False))
    out = {}
    for li, (name, scheme) in enumerate(layers.items()):
        checks, success = 0, 0.0
        if name == "idcopy" and not exact and not scheme.dense:
            # the seeded representation's exact distribution enumerates every seed
            sample_only = True
        else:
            sample_only = False
        for k in range(keys):
            rng = stream(seed, li, k)
            ek, dk = scheme.gen(rng)
            if corrupt:
                _, dk = scheme.gen(stream(seed, li, k, 99))
            for m in _message_list(scheme.message_length):
                ct = scheme.enc(ek, m, rng)
                try:
                    if sample_only:
                        p = float(scheme.dec(dk, ct, stream(seed, li, k, 7)) == m)
                    else:
                        p = scheme.dec_distribution(dk, ct).get(m, 0.0)
                except ValueError:
                    # a wrong key can make decryption abort outright; that is a failed round trip
                    p = 0.0
                success += p
                checks += 1
        rate = success / checks
        out[name] = {"success": round(rate, 12), "checks": checks, "failures": round(checks - success, 9),
                     "mode": "sampled" if sample_only else "exact"}
    report = {"report_version": REPORT_VERSION, "command": "roundtrip", "seed": seed,
              "stack": stack_config(stack_cfg), "layers": out}
    return report


def cmd_verify_twirl(cfg: dict, seed: int, trials: int | None = None, exact: bool = False) -> dict:
    tw = cfg.get("twirl", {})
    try:
        tc = TwirlConfig(tw.get("t", 1), tw.get("N", 2), tw.get("M", 2))
    except ValueError as e:
        raise ConfigError(f"twirl: {e}") from None
    samples = trials if trials is not None else tw.get("samples", 2000)
    n_pur = tw.get("purifications", 5)
    for name, v in (("twirl.samples", samples), ("twirl.purifications", n_pur)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(f"{name}: expected an integer >= 1, got {v!r}")
    rng = stream(seed)
    sigma = random_density(RegisterLayout.of(("A", tc.N)), rng)
    reference = sim_t(sigma, tc)
    # purification independence: random unitaries on the purifier
    indep = 0.0
    for _ in range(n_pur):
        phi = purification(sigma, tc.M)
        phi = apply(haar_unitary(tc.M, rng), phi, ["B"])
        indep = max(indep, trace_distance(exact_twirl_B(copies(phi, tc.t), tc), reference))
    checks = {"purification_independence": indep}
    if tc.t == 1:
        closed = tensor(sigma, _maximally_mixed(tc.M))
        checks["closed_form"] = trace_distance(reference, _relabel(closed, reference.layout))
    phi = purification(sigma, tc.M)
    mc = mc_twirl_B(copies(phi, tc.t), tc, samples, rng)
    checks["exact_vs_mc"] = trace_distance(mc, reference)
    exact_max = max(v for k, v in checks.items() if k != "exact_vs_mc")
    if exact_max > EXACT_TOL:
        raise CheckFailure(f"exact twirl deviates from sim_t by {exact_max:.3e} > {EXACT_TOL}")
    return {"report_version": REPORT_VERSION, "command": "verify-twirl", "seed": seed,
            "t": tc.t, "N": tc.N, "M": tc.M, "samples": samples, "purifications": n_pur,
            "checks": checks, "trace_distance": exact_max, "mc_distance": checks["exact_vs_mc"]}


def _maximally_mixed(M: int) -> DensityMatrix:
    return DensityMatrix.maximally_mixed(RegisterLayout.of(("B", M)))


def _relabel(state, layout) -> DensityMatrix:
    return DensityMatrix.unchecked(layout, state.matrix)


def cmd_run_game(cfg: dict, seed: int, trials: int | None = None, exact: bool = False,
                 csv_path: str | None = None) -> dict:
    g = dict(cfg.get("game", {}))
    kind = g.get("kind", "clone")
    n_trials = trials if trials is not None else g.get("trials", 1000)
    gc = GameConfig(kind, g.get("t", 1), g.get("t_prime", 2), n_trials, seed, cfg.get("stack", {}),
                    g.get("layer"), g.get("degenerate", False))
    if kind in ("ind", "pr"):
        adv_name = g.get("adversary", "guess")
        if adv_name not in IND_ADVERSARIES:
            raise ConfigError(f"game.adversary: unknown adversary {adv_name!r}; expected one of {sorted(IND_ADVERSARIES)}")
        ske = build_stack(gc.stack)["ske"]
        try:
            stats = (run_ind if kind == "ind" else run_pr)(gc, IND_ADVERSARIES[adv_name](), scheme=ske)
        except ProtocolViolation as e:
            raise ConfigError(f"game.adversary: {e}") from None
        return {**game_report(gc, stats, ske, adv_name), "report_version": REPORT_VERSION, "command": "run-game"}
    strategy_name = g.get("strategy", "guess")
    make_strategy(strategy_name)
    base = {"report_version": REPORT_VERSION, "command": "run-game", "game": kind, "t": gc.t,
            "t_prime": gc.t_prime, "trials": gc.trials, "seed": seed, "strategy": strategy_name}
    if g.get("reduction", False):
        if kind != "clone":
            raise ConfigError("game.reduction: the reduction applies to the clone game")
        pr = paired_reduction(gc, strategy_name, hybrid=bool(g.get("hybrid", False)))
        return {**base, "scheme": build_stack({**gc.stack, "compiler": "expand"})["expand"].describe(),
                "paired": pr.to_json(), "estimate": pr.direct.estimate,
                "ci": list(pr.direct.ci), "wins": pr.direct.wins}
    scheme = gc.scheme()
    try:
        records = play_trials(gc, make_strategy(strategy_name), scheme=scheme)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"game: strategy {strategy_name!r} cannot play against {scheme.name!r}: {e}") from None
    stats = stats_aggregate(records, seed)
    if csv_path:
        Path(csv_path).write_text(transcripts_csv(records))
    return {**game_report(gc, stats, scheme, strategy_name), "report_version": REPORT_VERSION,
            "command": "run-game"}


HANDLERS = {"roundtrip": cmd_roundtrip, "verify-twirl": cmd_verify_twirl, "run-game": cmd_run_game}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uclab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON experiment config")
        sp.add_argument("--seed", type=int, default=None, help="master seed (u64)")
        sp.add_argument("--out", help="write the JSON report here (default: stdout)")
        sp.add_argument("--trials", type=int, default=None, help="override the trial/sample count")
        sp.add_argument("--exact", action="store_true", help="force exact-mode evaluation where available")
        if name == "run-game":
            sp.add_argument("--csv", help="write one CSV row per trial")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if "command" in cfg and cfg["command"] != args.command:
            raise ConfigError(f"command: config is for {cfg['command']!r}, invoked {args.command!r}")
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed: expected an unsigned 64-bit integer")
        if args.trials is not None and args.trials < 1:
            raise ConfigError("--trials: must be >= 1")
        kwargs = {"csv_path": args.csv} if args.command == "run-game" else {}
        report = HANDLERS[args.command](cfg, seed, args.trials, args.exact, **kwargs)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (InvariantError, CheckFailure, AssertionError) as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 3
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())

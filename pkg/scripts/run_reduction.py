"""Paired direct/wrapped cloning games for every shipped strategy on a few one-bit bases."""
import argparse
import json
import time

from uclab.games import SHIPPED, GameConfig, paired_reduction

BASES = {
    "classical-1": {"ucbit": {"kind": "classical", "n": 1}},
    "bb84-1": {"ucbit": {"kind": "bb84", "n": 1}},
    "bb84-2": {"ucbit": {"kind": "bb84", "n": 2}},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bases", nargs="+", default=list(BASES), choices=list(BASES))
    ap.add_argument("--hybrid", action="store_true", help="zero the unselected grid entries in the wrapper")
    ap.add_argument("--out", help="write all results as JSON")
    args = ap.parse_args()

    rows = []
    print(f"{'base':<12} {'strategy':<20} {'direct':>8} {'wrapped':>8} {'diff':>8}  agree")
    for base in args.bases:
        for name in SHIPPED:
            t0 = time.time()
            cfg = GameConfig("clone", trials=args.trials, seed=args.seed, stack=BASES[base])
            pr = paired_reduction(cfg, name, hybrid=args.hybrid)
            print(f"{base:<12} {name:<20} {pr.direct.estimate:8.4f} {pr.wrapped.estimate:8.4f} "
                  f"{pr.difference:+8.4f}  {pr.agree}  ({time.time() - t0:.1f}s)")
            rows.append({"base": base, **pr.to_json()})
    if args.out:
        with open(args.out, "w") as f:
            json.dump(rows, f, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()

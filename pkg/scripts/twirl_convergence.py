"""Monte-Carlo Haar twirl vs the exact Weingarten twirl, as a function of the sample count."""
import argparse

from uclab.qstate import RegisterLayout, random_density, trace_distance
from uclab.rng import stream
from uclab.twirl import TwirlConfig, copies, exact_twirl_B, mc_twirl_B, purification, sim_t


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--M", type=int, default=2)
    ap.add_argument("--ts", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--samples", type=int, nargs="+", default=[500, 2000, 8000, 20000])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = stream(args.seed)
    sigma = random_density(RegisterLayout.of(("A", args.N)), rng)
    print(f"{'t':>2} {'exact vs sim_t':>15} " + " ".join(f"{'mc@' + str(s):>10}" for s in args.samples))
    for t in args.ts:
        cfg = TwirlConfig(t, args.N, args.M)
        X = copies(purification(sigma, args.M), t)
        exact = exact_twirl_B(X, cfg)
        gap = trace_distance(exact, sim_t(sigma, cfg))
        mc = [trace_distance(mc_twirl_B(X, cfg, s, stream(args.seed, t, s)), exact) for s in args.samples]
        print(f"{t:>2} {gap:15.2e} " + " ".join(f"{v:10.4f}" for v in mc))


if __name__ == "__main__":
    main()

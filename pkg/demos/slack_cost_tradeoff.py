#!/usr/bin/env python3
"""How the linear factory's price scales with the slack margin.

The factory turns coins with unknown biases into one Bernoulli(r) flip,
r = sum C_i p_i, provided a known margin eps with r <= 1 - eps.  The margin
is what it charges for: expected flips stay under 7.67 * C / eps.  Here we
pin r to the hardest legal value 1 - eps and shrink eps, watching the cost
climb while the observed/bound ratio stays comfortably below one (a sharper
analysis of the same construction gives 469/62 ~ 7.56).  The occasional
recursive restart averages well under 1.4 calls per emitted flip.
"""

import argparse

from bfactory import FactoryKind, judge, run_trials

EPSILONS = (0.5, 0.3, 0.2, 0.1)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2 * 10**4)
    ap.add_argument("--constant", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    C = args.constant
    print(f"single coin, C = {C}, r pinned to 1 - eps, "
          f"{args.trials} trials per row\n")
    print(f"{'eps':>5} {'r':>5} {'flips':>8} {'bound':>8} {'ratio':>6} "
          f"{'recursion':>9}")
    for i, eps in enumerate(EPSILONS):
        kind = FactoryKind.linear(eps)
        biases = ((1.0 - eps) / C,)
        summary = run_trials(kind, (C,), biases, args.trials, seed=args.seed + i)
        verdict = judge(summary, kind, (C,), biases)
        print(f"{eps:>5.2f} {1 - eps:>5.2f} {verdict.flip_mean:>8.2f} "
              f"{verdict.flip_bound:>8.2f} {verdict.flip_ratio:>6.2f} "
              f"{verdict.recursion_mean:>9.3f}")
    print("\nHalving eps doubles the bill; the ratio column is the empirical "
          "cost against\n7.67 * C / eps.")


if __name__ == "__main__":
    main()

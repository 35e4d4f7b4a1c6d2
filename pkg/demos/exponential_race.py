#!/usr/bin/env python3
"""The exponential race behind the logistic factory.

A rate-1 alarm clock races a stream of arrivals at known rate C = sum C_i.
Each arrival picks coin i with probability C_i/C and flips it; a head before
the alarm emits 1.  Thinning the arrivals by the unknown biases leaves an
effective head-arrival rate of r = sum C_i p_i, so the head wins the race
with probability r/(1+r) -- and the flips spent average exactly C/(1+r),
no matter how r is split across coins.
"""

import argparse

from bfactory import FactoryKind, RngStream, judge, run_trials

CASES = [
    ((0.5,), (0.2,)),
    ((2.0,), (0.25,)),
    ((4.0,), (0.5,)),
    ((1.0, 2.0, 1.0), (0.5, 0.125, 0.25)),  # same r = 1.0 as the 1.25 * 0.8 cell
    ((1.25,), (0.8,)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    # the primitive first: P(Exp(a) beats Exp(b)) = a/(a+b)
    stream = RngStream(args.seed, 0)
    n = args.trials
    wins = sum(stream.exponential(2.0) < stream.exponential(1.0)
               for _ in range(n))
    print(f"race primitive: P(Exp(2) < Exp(1)) ~= {wins / n:.4f}"
          f"   closed form 2/3 = {2 / 3:.4f}\n")

    print(f"{'constants':>18} {'r':>5} {'target':>8} {'observed':>9} "
          f"{'z':>6} {'flips':>7} {'exact':>7}")
    for i, (constants, biases) in enumerate(CASES):
        summary = run_trials(FactoryKind.logistic(), constants, biases,
                             args.trials, seed=args.seed + i)
        verdict = judge(summary, FactoryKind.logistic(), constants, biases)
        r = sum(c * p for c, p in zip(constants, biases))
        print(f"{str(constants):>18} {r:>5.2f} {verdict.target_mean:>8.4f} "
              f"{verdict.p_hat:>9.4f} {verdict.z:>6.2f} "
              f"{verdict.flip_mean:>7.4f} {verdict.flip_bound:>7.4f}")
    print("\nThe last two rows share r = 1.0: different decompositions, same "
          "output law,\ndifferent flip budgets (C = 4 vs C = 1.25).")


if __name__ == "__main__":
    main()

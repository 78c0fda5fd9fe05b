#!/usr/bin/env python3
"""Estimation error of MLAE versus total oracle calls.

Runs the power schedules (0, 1, 2, ..., 2^jmax) on a fixed integration
problem, drawing shot counts from the exact amplified probabilities, and
prints the mean absolute error per schedule together with the 1/sqrt(M)
shot-noise line. The fitted slope should approach -1, the Heisenberg-like
rate the amplified circuits buy over plain sampling at -1/2.
"""

import argparse
import math

import numpy as np

from qaekit.problems import sin2_problem
from qaekit.qae import default_schedule, grover_power, mlae_estimate, oracle_calls
from qaekit.simulator import good_probability, simulate


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=6, help="largest power exponent")
    ap.add_argument("--shots", type=int, default=8192)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--y", type=float, default=0.7)
    ap.add_argument("--n", type=int, default=2, help="grid qubits")
    args = ap.parse_args()

    prob = sin2_problem(args.n, args.y, "midpoint")
    op = prob.operator
    a = good_probability(simulate(op.circuit), op.flags)
    p_exact = {
        k: good_probability(simulate(grover_power(op, k, optimized=True)), op.flags)
        for k in default_schedule(args.jmax, args.shots).powers
    }

    print(f"target a = {a:.12f}  ({args.n} grid qubits, y = {args.y})")
    print(f"{'jmax':>5} {'M oracle calls':>15} {'mean |err|':>12} {'1/sqrt(M)':>12}")
    Ms, means = [], []
    for j in range(args.jmax + 1):
        sched = default_schedule(j, args.shots)
        errs = []
        for seed in range(args.seeds):
            rng = np.random.default_rng([seed, j])
            hits = [rng.binomial(m, p_exact[k]) for k, m in zip(sched.powers, sched.shots)]
            errs.append(abs(mlae_estimate(sched, hits).a_hat - a))
        m = oracle_calls(sched.powers, sched.shots, optimized=True)
        mean = float(np.mean(errs))
        Ms.append(m)
        means.append(mean)
        print(f"{j:>5} {m:>15} {mean:>12.2e} {1.0 / math.sqrt(m):>12.2e}")
    slope = float(np.polyfit(np.log(Ms), np.log(means), 1)[0])
    print(f"fitted log-log slope: {slope:+.3f}")


if __name__ == "__main__":
    main()

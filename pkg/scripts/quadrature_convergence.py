#!/usr/bin/env python3
"""Convergence of the circuit-evaluated quadrature rules on the sin^2 integral.

For each rule this runs the exact simulator at n = 1..nmax grid qubits,
turns good-state probabilities into integral estimates, and prints the error
against the closed-form integral next to the a-priori bound. The fitted
log2-error slopes should sit near -1 (left/right), -2 (midpoint/trapezoid)
and -4 (Simpson).
"""

import argparse

from qaekit.problems import sin2_derivative_bound, sin2_problem
from qaekit.quadrature import (
    combine_estimates,
    convergence_slope,
    error_bound,
    exact_sin2_integral,
)
from qaekit.simulator import good_probability, simulate

RULES = ("left", "right", "midpoint", "trapezoid", "simpson")
DERIV_ORDER = {"left": 1, "right": 1, "midpoint": 2, "trapezoid": 2, "simpson": 4}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--y", type=float, default=0.7, help="upper integration limit")
    ap.add_argument("--nmax", type=int, default=8)
    args = ap.parse_args()

    exact = exact_sin2_integral(args.y)
    ns = list(range(1, args.nmax + 1))
    base = {r: {} for r in ("left", "right", "midpoint")}
    for r in base:
        for n in ns:
            prob = sin2_problem(n, args.y, r)
            p = good_probability(simulate(prob.operator.circuit), prob.flags)
            base[r][n] = prob.integral_from_probability(p)

    print(f"integral of sin^2(pi x) over [0, {args.y}] = {exact:.12f}")
    for rule in RULES:
        errs = []
        print(f"\n== {rule} ==")
        print(f"{'n':>3} {'estimate':>16} {'error':>12} {'bound':>12}")
        for n in ns:
            est = combine_estimates(rule, {r: base[r][n] for r in base})
            err = abs(est - exact)
            errs.append(err)
            b = error_bound(rule, n, sin2_derivative_bound(DERIV_ORDER[rule], args.y), args.y)
            print(f"{n:>3} {est:>16.12f} {err:>12.2e} {b.bound:>12.2e}")
        print(f"fitted slope: {convergence_slope(ns, errs):+.3f}")


if __name__ == "__main__":
    main()

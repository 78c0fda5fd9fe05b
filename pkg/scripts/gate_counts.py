#!/usr/bin/env python3
"""CNOT counts of the amplified integration circuits, across optimization modes.

Prints one table per register width covering k = 1..16, all-to-all and
linear-chain topologies, with and without the echo rewrite. The all-to-all
optimized counts follow 3k+1 (two qubits) and the unoptimized ones 5k+2;
the chain numbers include routing overhead.
"""

import argparse

from qaekit.problems import sin2_problem
from qaekit.transpile import ALL_TO_ALL, LINEAR_CHAIN, count_cnots


def table(n_grid: int, ks) -> None:
    qubits = n_grid + 1
    print(f"== {qubits}-qubit circuit (n = {n_grid} grid qubits) ==")
    header = f"{'k':>4} {'opt+drop':>9} {'plain':>7} {'chain opt+drop':>15}"
    print(header)
    op = sin2_problem(n_grid, 1.0, "left").operator
    for k in ks:
        fast = count_cnots(op, k, optimized=True, topo=ALL_TO_ALL, drop_final=True)
        slow = count_cnots(op, k, optimized=False, topo=ALL_TO_ALL, drop_final=False)
        chain = count_cnots(op, k, optimized=True, topo=LINEAR_CHAIN, drop_final=True)
        print(f"{k:>4} {fast.cnot_count:>9} {slow.cnot_count:>7} {chain.cnot_count:>15}")
    print()


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=16)
    args = ap.parse_args()
    ks = [k for k in (1, 2, 4, 8, 16, 32, 64) if k <= args.kmax]
    for n_grid in (1, 2):
        table(n_grid, ks)


if __name__ == "__main__":
    main()

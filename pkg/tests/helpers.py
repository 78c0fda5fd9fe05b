"""Shared oracles for the tests: small brute-force references, no circuits."""

import numpy as np

from qaekit.simulator import unitary_of


def up_to_phase(circ_a, circ_b, tol=1e-10):
    """Max deviation between two circuits' unitaries after phase alignment."""
    ua, ub = unitary_of(circ_a), unitary_of(circ_b)
    idx = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    if abs(ub[idx]) == 0:
        return float(np.max(np.abs(ua - ub)))
    phase = ua[idx] / ub[idx]
    phase /= abs(phase)
    return float(np.max(np.abs(ua - phase * ub)))


def mean_product(*tables):
    """Brute-force good probability of a chain of value oracles sharing one
    control register: mean over control values of the entrywise product."""
    prod = np.ones_like(np.asarray(tables[0], dtype=float))
    for t in tables:
        prod = prod * np.asarray(t, dtype=float)
    return float(np.mean(prod))


def random_unit_tables(rng, n, count):
    """Value tables in [0, 1] for an n-control oracle."""
    return [rng.random(1 << n) for _ in range(count)]

"""Two-step discretized stochastic-volatility model priced by amplitude estimation.

The asset follows S' = S + mu*S*dt + sqrt(v)*S*X and the variance
v' = v + kappa*(theta - v)*dt + xi*sqrt(v)*X', with independent unit normals
scaled by sqrt(dt) (correlated increments are out of scope). Each variable is
snapped to a small grid with cell probabilities given by the normal CDF over
midpoint intervals, outer cells extending to infinity. The eight-qubit
instance prepares nu1, S1, S2 registers in uniform superposition, writes the
transition probabilities and the normalized call payoff onto four ancillas,
and the all-ones probability of those ancillas carries the expected payoff
(divided by 2^4 for the uniform prefactor and by S_max - K for the payoff
normalization).

Built-in reference tables are rounded benchmark values quoted to three
decimals; self-computed tables from the model parameters differ from them
substantially (see compare_tables), which is expected and documented rather
than tuned away.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .circuits import Circuit, h, mry
from .simulator import good_probability, simulate
from .state_prep import FlaggedOperator, rotation_angles

N_STATE_QUBITS = 4  # nu1 + S1 + two for S2
N_ANCILLAS = 4


@dataclass(frozen=True)
class HestonParams:
    kappa: float = 1.0  # mean-reversion rate
    theta: float = 1.0  # long-run variance
    xi: float = 0.5  # vol of vol
    mu: float = 1.0  # rate of return
    rho: float = 0.0  # increment correlation; only 0 is supported
    nu0: float = 1.0
    s0: float = 1.0
    dt: float = 1.0
    steps: int = 2
    strike: float = 1.0

    def __post_init__(self):
        if self.xi < 0:
            raise ValueError("xi must be non-negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")


@dataclass(frozen=True)
class Normal:
    mean: float
    std: float

    def __post_init__(self):
        if self.std < 0:
            raise ValueError("std must be non-negative")


def step_distribution(params: HestonParams, nu_prev: float, s_prev: float) -> tuple[Normal, Normal]:
    """One Euler step: independent normals for the next variance and price."""
    if params.rho != 0.0:
        raise NotImplementedError("correlated increments (rho != 0) are not supported")
    if nu_prev <= 0:
        raise ValueError("variance must stay positive on the grid")
    root = math.sqrt(nu_prev * params.dt)
    nu_next = Normal(
        nu_prev + params.kappa * (params.theta - nu_prev) * params.dt,
        params.xi * root,
    )
    s_next = Normal(s_prev * (1.0 + params.mu * params.dt), root * s_prev)
    return nu_next, s_next


def grid_cell_probabilities(dist: Normal, grid) -> np.ndarray:
    """Normal mass over midpoint cells; the outer cells run to +/- infinity."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 2 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing with at least 2 points")
    if dist.std == 0.0:
        p = np.zeros(len(g))
        p[int(np.argmin(np.abs(g - dist.mean)))] = 1.0  # argmin ties break low
        return p
    edges = np.concatenate(([-np.inf], (g[:-1] + g[1:]) / 2.0, [np.inf]))
    z = (edges - dist.mean) / dist.std
    return ndtr(z[1:]) - ndtr(z[:-1])


def payoff_values(grid_s_t, strike: float) -> np.ndarray:
    """Call payoff max(S - K, 0) scaled into [0, 1] by its grid maximum."""
    g = np.asarray(grid_s_t, dtype=float)
    raw = np.maximum(g - strike, 0.0)
    top = g.max() - strike
    if top <= 0:
        warnings.warn("strike at or above the grid: payoff is identically zero")
        return np.zeros_like(raw)
    return raw / top


@dataclass(frozen=True)
class HestonGrids:
    nu1: tuple[float, ...] = (0.8, 1.2)
    s1: tuple[float, ...] = (0.75, 1.25)
    s2: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)

    def __post_init__(self):
        for name in ("nu1", "s1", "s2"):
            g = getattr(self, name)
            if len(g) < 2 or any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} grid must be strictly increasing with >= 2 points")
        if len(self.nu1) != 2 or len(self.s1) != 2 or len(self.s2) != 4:
            raise ValueError("the circuit layout needs grids of sizes 2, 2, 4")


@dataclass(frozen=True)
class HestonTables:
    p_nu1: tuple[float, ...]
    p_s1: tuple[float, ...]
    p_s2_cond: tuple[tuple[float, ...], ...]  # row index = nu_i + 2*s1_j, entries over S2

    def __post_init__(self):
        if len(self.p_nu1) != 2 or len(self.p_s1) != 2:
            raise ValueError("nu1 and S1 tables must have two entries each")
        if len(self.p_s2_cond) != 4 or any(len(r) != 4 for r in self.p_s2_cond):
            raise ValueError("conditional table must be 4 rows of 4 entries")
        for vec in (self.p_nu1, self.p_s1, *self.p_s2_cond):
            if any(p < 0 or p > 1 for p in vec):
                raise ValueError("probabilities must lie in [0, 1]")

    def row_sums(self) -> list[float]:
        return [sum(self.p_nu1), sum(self.p_s1)] + [sum(r) for r in self.p_s2_cond]

    def marginal_s2(self) -> np.ndarray:
        out = np.zeros(4)
        for i, pn in enumerate(self.p_nu1):
            for j, ps in enumerate(self.p_s1):
                out += pn * ps * np.asarray(self.p_s2_cond[i + 2 * j])
        return out


def compute_tables(params: HestonParams, grids: HestonGrids = HestonGrids()) -> HestonTables:
    """Transition tables from the model itself (no second variance register:
    the final price needs nu1 but nothing needs nu2)."""
    if params.steps != 2:
        raise NotImplementedError("only the two-step instance is supported")
    nu_dist, s1_dist = step_distribution(params, params.nu0, params.s0)
    p_nu1 = grid_cell_probabilities(nu_dist, grids.nu1)
    p_s1 = grid_cell_probabilities(s1_dist, grids.s1)
    cond = []
    for j, s1 in enumerate(grids.s1):
        for i, nu1 in enumerate(grids.nu1):
            _, s2_dist = step_distribution(params, nu1, s1)
            cond.append((i + 2 * j, grid_cell_probabilities(s2_dist, grids.s2)))
    cond.sort(key=lambda t: t[0])
    return HestonTables(
        p_nu1=tuple(p_nu1),
        p_s1=tuple(p_s1),
        p_s2_cond=tuple(tuple(row) for _, row in cond),
    )


def reference_tables() -> HestonTables:
    """Benchmark probabilities, quoted to three decimals (rows as printed)."""
    return HestonTables(
        p_nu1=(0.50, 0.50),
        p_s1=(0.38, 0.62),
        p_s2_cond=(
            (0.063, 0.937, 0.001, 0.000),  # nu1=0.8, S1=0.75
            (0.105, 0.890, 0.005, 0.000),  # nu1=1.2, S1=0.75
            (0.007, 0.631, 0.361, 0.001),  # nu1=0.8, S1=1.25
            (0.022, 0.592, 0.382, 0.005),  # nu1=1.2, S1=1.25
        ),
    )


def reference_marginal() -> tuple[float, ...]:
    """Marginal S2 distribution as quoted alongside the reference tables."""
    return (0.040, 0.725, 0.233, 0.002)


def tables_to_csv(tables: HestonTables) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "nu_index", "s1_index", "s2_index", "probability"])
    for i, p in enumerate(tables.p_nu1):
        w.writerow(["nu1", i, "", "", repr(float(p))])
    for j, p in enumerate(tables.p_s1):
        w.writerow(["s1", "", j, "", repr(float(p))])
    for i in range(2):
        for j in range(2):
            for l, p in enumerate(tables.p_s2_cond[i + 2 * j]):
                w.writerow(["s2", i, j, l, repr(float(p))])
    return buf.getvalue()


def tables_from_csv(text: str) -> HestonTables:
    p_nu1 = [None, None]
    p_s1 = [None, None]
    cond = [[None] * 4 for _ in range(4)]
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0] != "table":
        raise ValueError("expected a header row starting with 'table'")
    for row in rows[1:]:
        if not row or not row[0]:
            continue
        kind = row[0]
        if kind == "nu1":
            p_nu1[int(row[1])] = float(row[4])
        elif kind == "s1":
            p_s1[int(row[2])] = float(row[4])
        elif kind == "s2":
            cond[int(row[1]) + 2 * int(row[2])][int(row[3])] = float(row[4])
        else:
            raise ValueError(f"unknown table row kind {kind!r}")
    if any(v is None for v in p_nu1 + p_s1) or any(v is None for r in cond for v in r):
        raise ValueError("incomplete probability tables")
    return HestonTables(tuple(p_nu1), tuple(p_s1), tuple(tuple(r) for r in cond))


def build_operator(
    tables: HestonTables, grids: HestonGrids = HestonGrids(), strike: float = 1.0
) -> FlaggedOperator:
    """Eight-qubit preparation: nu1 on qubit 0, S1 on 1, S2 on (2, 3), the
    three transition ancillas on 4-6 and the payoff ancilla on 7."""
    payoff = payoff_values(grids.s2, strike)
    cond_flat = [0.0] * 16
    for i in range(2):
        for j in range(2):
            for l in range(4):
                cond_flat[i + 2 * j + 4 * l] = tables.p_s2_cond[i + 2 * j][l]
    gates = (
        h(0), h(1), h(2), h(3),
        mry(tuple(rotation_angles(tables.p_nu1)), (0,), 4),
        mry(tuple(rotation_angles(tables.p_s1)), (1,), 5),
        mry(tuple(rotation_angles(cond_flat)), (0, 1, 2, 3), 6),
        mry(tuple(rotation_angles(payoff)), (2, 3), 7),
    )
    return FlaggedOperator(
        circuit=Circuit(N_STATE_QUBITS + N_ANCILLAS, gates),
        flags=frozenset(range(4, 8)),
        value_semantics="mean over paths of p(nu1) p(S1) p(S2|nu1,S1) payoff(S2)",
    )


def normalized_expected_payoff(op: FlaggedOperator) -> float:
    """E[payoff / (S_max - K)]: the all-flags probability times 2^(state qubits)."""
    p = good_probability(simulate(op.circuit), op.flags)
    return p * (1 << N_STATE_QUBITS)


def expected_payoff_reference(
    tables: HestonTables, grids: HestonGrids = HestonGrids(), strike: float = 1.0
) -> float:
    """Brute-force sum over all paths of probability times raw payoff."""
    total = 0.0
    for i, pn in enumerate(tables.p_nu1):
        for j, ps in enumerate(tables.p_s1):
            row = tables.p_s2_cond[i + 2 * j]
            for l, s2 in enumerate(grids.s2):
                total += pn * ps * row[l] * max(s2 - strike, 0.0)
    return total


def compare_tables(computed: HestonTables, reference: HestonTables) -> dict:
    """Entrywise deviation report between two table sets."""
    diffs = {
        "p_nu1": [a - b for a, b in zip(computed.p_nu1, reference.p_nu1)],
        "p_s1": [a - b for a, b in zip(computed.p_s1, reference.p_s1)],
        "p_s2_cond": [
            [a - b for a, b in zip(ra, rb)]
            for ra, rb in zip(computed.p_s2_cond, reference.p_s2_cond)
        ],
    }
    flat = [abs(d) for d in diffs["p_nu1"] + diffs["p_s1"]] + [
        abs(d) for row in diffs["p_s2_cond"] for d in row
    ]
    return {
        "differences": diffs,
        "max_abs_difference": max(flat),
        "computed_marginal_s2": [float(v) for v in computed.marginal_s2()],
        "reference_marginal_s2": [float(v) for v in reference.marginal_s2()],
    }

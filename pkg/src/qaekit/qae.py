"""Amplitude amplification and maximum-likelihood amplitude estimation.

For a preparation A with good-state probability a = sin^2(theta), the
amplified circuit Q^k A has good-state probability sin^2((2k+1) theta).
Measuring a schedule of powers and maximizing the joint likelihood gives an
estimate whose error falls off near 1/M in total oracle calls M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .circuits import Circuit, compose, cz, inverse, mcz, x, z
from .simulator import GoodStateFlags, NumericalError
from .state_prep import FlaggedOperator

_LOG_FLOOR = 1e-300


def build_S0(num_qubits: int) -> Circuit:
    """Reflection I - 2|0...0><0...0| (phase flip of the all-zeros state)."""
    if num_qubits == 1:
        return Circuit(1, (x(0), z(0), x(0)))
    layer = tuple(x(q) for q in range(num_qubits))
    return Circuit(num_qubits, layer + (mcz(*range(num_qubits)),) + layer)


def build_S_psi0(num_qubits: int, flagset: GoodStateFlags) -> Circuit:
    """Phase flip of every good state (all flag qubits |1>)."""
    qs = sorted(flagset.qubits)
    if max(qs) >= num_qubits:
        raise ValueError("flag qubit outside register")
    if len(qs) == 1:
        return Circuit(num_qubits, (z(qs[0]),))
    if len(qs) == 2:
        return Circuit(num_qubits, (cz(qs[0], qs[1]),))
    return Circuit(num_qubits, (mcz(*qs),))


def build_Q(a: FlaggedOperator) -> Circuit:
    """One amplification step: S_psi0, then A^dagger, S_0, A (applied in that order)."""
    s0 = build_S0(a.num_qubits)
    spsi = build_S_psi0(a.num_qubits, a.flags)
    return compose(compose(spsi, inverse(a.circuit)), compose(s0, a.circuit))


def grover_power(a: FlaggedOperator, k: int, optimized: bool = False) -> Circuit:
    """Q^k A as a circuit. With optimized=True and A in rotation normal form,
    uses the conjugation shortcut (k+1 oracle applications instead of 2k+1);
    operators without a normal form fall back to the plain construction."""
    if k < 0:
        raise ValueError("power must be non-negative")
    if optimized and a.normal_form is not None and k > 0:
        from .spin_echo import build_optimized_power

        return build_optimized_power(a.normal_form.prefix, a.normal_form.oracle, a.flags, k)
    circ = a.circuit
    if k == 0:
        return circ
    q = build_Q(a)
    for _ in range(k):
        circ = compose(circ, q)
    return circ


def oracle_calls(powers, shots, optimized: bool = False) -> int:
    """Total applications of the state-preparation oracle across a schedule."""
    per = [(k + 1 if optimized else 2 * k + 1) for k in powers]
    return int(sum(p * m for p, m in zip(per, shots)))


@dataclass(frozen=True)
class MlaeSchedule:
    powers: tuple[int, ...]
    shots: tuple[int, ...]

    def __post_init__(self):
        if not self.powers:
            raise ValueError("schedule must not be empty")
        if len(self.powers) != len(self.shots):
            raise ValueError("one shot count per power")
        if any(k < 0 for k in self.powers):
            raise ValueError("powers must be non-negative")
        if list(self.powers) != sorted(set(self.powers)):
            raise ValueError("powers must be strictly increasing")
        if any(m <= 0 for m in self.shots):
            raise ValueError("shot counts must be positive")

    def to_dict(self) -> dict:
        return {"powers": list(self.powers), "shots": list(self.shots)}

    @staticmethod
    def from_dict(d: dict) -> "MlaeSchedule":
        return MlaeSchedule(tuple(d["powers"]), tuple(d["shots"]))


def default_schedule(k_max_exponent: int, shots: int) -> MlaeSchedule:
    """k = 0 baseline plus doubling powers 2^j, j = 0..k_max_exponent."""
    if k_max_exponent < 0:
        raise ValueError("k_max_exponent must be non-negative")
    powers = (0, *(1 << j for j in range(k_max_exponent + 1)))
    return MlaeSchedule(powers, (shots,) * len(powers))


@dataclass(frozen=True)
class MlaeResult:
    a_hat: float
    theta_hat: float
    log_likelihood: float
    schedule: MlaeSchedule
    hits: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "a_hat": self.a_hat,
            "theta_hat": self.theta_hat,
            "log_likelihood": self.log_likelihood,
            "schedule": self.schedule.to_dict(),
            "hits": list(self.hits),
        }


def log_likelihood(theta, schedule: MlaeSchedule, hits) -> np.ndarray:
    """Joint log likelihood of the hit counts at angles theta (vectorized)."""
    th = np.asarray(theta, dtype=float)
    ll = np.zeros_like(th)
    for k, m, hit in zip(schedule.powers, schedule.shots, hits):
        ang = (2 * k + 1) * th
        ll += hit * np.log(np.clip(np.sin(ang) ** 2, _LOG_FLOOR, None))
        ll += (m - hit) * np.log(np.clip(np.cos(ang) ** 2, _LOG_FLOOR, None))
    return ll


def mlae_estimate(schedule: MlaeSchedule, hits) -> MlaeResult:
    """Dense grid search over theta in [0, pi/2] plus bounded local refinement.

    Fractional hit counts are accepted (exact-probability mode). Likelihood
    ties resolve toward the smaller angle.
    """
    hits = tuple(float(v) for v in hits)
    if len(hits) != len(schedule.powers):
        raise ValueError("one hit count per scheduled power")
    for hit, m in zip(hits, schedule.shots):
        if hit < 0 or hit > m:
            raise ValueError("hits must lie in [0, shots]")

    k_max = max(schedule.powers)
    npts = max(100_000, 20 * (2 * k_max + 1))
    eps = 1e-12
    grid = np.linspace(eps, math.pi / 2 - eps, npts)
    ll = log_likelihood(grid, schedule, hits)
    if not np.any(np.isfinite(ll)):
        raise NumericalError("likelihood is degenerate everywhere on the grid")
    i = int(np.argmax(ll))  # first maximum = smallest angle on ties

    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, npts - 1)]
    res = optimize.minimize_scalar(
        lambda t: -float(log_likelihood(np.array([t]), schedule, hits)[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-12},
    )
    theta, best = float(grid[i]), float(ll[i])
    if res.success and -res.fun >= best:
        theta, best = float(res.x), float(-res.fun)
    return MlaeResult(math.sin(theta) ** 2, theta, best, schedule, hits)

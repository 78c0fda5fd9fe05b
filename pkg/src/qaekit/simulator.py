"""Exact statevector simulation of the circuit IR.

States are flat complex128 arrays indexed so that qubit q is bit q of the
basis index (qubit 0 = least significant). Gate application works on flat
indices with bit masks, so the same kernels run on a state column or on a
full unitary matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate

MAX_SIM_QUBITS = 24
MAX_UNITARY_QUBITS = 12

_NORM_TOL = 1e-10

_SQ2 = 1.0 / math.sqrt(2.0)


class NumericalError(RuntimeError):
    """Simulation or estimation produced numerically unusable output."""


@dataclass(frozen=True)
class GoodStateFlags:
    """Qubits that must all read 1 for a measurement to count as good."""

    qubits: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "qubits", frozenset(self.qubits))
        if not self.qubits:
            raise ValueError("flag set must be non-empty")

    def __iter__(self):
        return iter(sorted(self.qubits))


def flags(*qubits: int) -> GoodStateFlags:
    return GoodStateFlags(frozenset(qubits))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.amplitudes.shape[0])))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class ShotCounts:
    shots: int
    good_hits: float
    seed: int | None = None


def _mat1q(g: Gate) -> np.ndarray:
    k = g.kind
    if k == "H":
        return np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)
    if k == "X" or k == "CX":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if k in ("RY", "CRY"):
        c, s = math.cos(g.angle / 2), math.sin(g.angle / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if k == "RZ":
        return np.array([[np.exp(-0.5j * g.angle), 0], [0, np.exp(0.5j * g.angle)]], dtype=complex)
    raise ValueError(f"no 1q matrix for {k}")


def _apply_gate(psi: np.ndarray, g: Gate, n: int) -> None:
    """In-place application; psi has shape (2**n,) or (2**n, m)."""
    dim = 1 << n
    idx = np.arange(dim, dtype=np.intp)
    t = g.targets[0]
    if g.kind in ("Z", "CZ", "MCZ"):
        mask = 1 << t
        for c in g.controls:
            mask |= 1 << c
        psi[(idx & mask) == mask] *= -1.0
        return
    if g.kind == "MRY":
        sel = idx[((idx >> t) & 1) == 0]
        val = np.zeros(sel.shape, dtype=np.intp)
        for j, c in enumerate(g.controls):
            val |= ((sel >> c) & 1) << j
        theta = np.asarray(g.angles)[val]
        co, si = np.cos(theta / 2), np.sin(theta / 2)
        if psi.ndim == 2:
            co, si = co[:, None], si[:, None]
        a0, a1 = psi[sel], psi[sel | (1 << t)]
        psi[sel] = co * a0 - si * a1
        psi[sel | (1 << t)] = si * a0 + co * a1
        return
    # remaining kinds act with a fixed 2x2 on the target, gated by controls
    keep = ((idx >> t) & 1) == 0
    for c in g.controls:
        keep &= ((idx >> c) & 1) == 1
    sel = idx[keep]
    m = _mat1q(g)
    a0, a1 = psi[sel], psi[sel | (1 << t)]
    psi[sel] = m[0, 0] * a0 + m[0, 1] * a1
    psi[sel | (1 << t)] = m[1, 0] * a0 + m[1, 1] * a1


def simulate(c: Circuit) -> StateVector:
    """Run c on |0...0> and return the exact final state."""
    if c.num_qubits > MAX_SIM_QUBITS:
        raise ValueError(f"refusing to simulate {c.num_qubits} qubits (cap {MAX_SIM_QUBITS})")
    psi = np.zeros(1 << c.num_qubits, dtype=complex)
    psi[0] = 1.0
    for g in c.gates:
        _apply_gate(psi, g, c.num_qubits)
    drift = abs(np.vdot(psi, psi).real - 1.0)
    if drift > _NORM_TOL:
        raise NumericalError(f"norm drifted by {drift:.3e}")
    return StateVector(psi)


def unitary_of(c: Circuit) -> np.ndarray:
    """Dense unitary of c (columns = images of basis states)."""
    if c.num_qubits > MAX_UNITARY_QUBITS:
        raise ValueError(f"refusing dense unitary on {c.num_qubits} qubits (cap {MAX_UNITARY_QUBITS})")
    u = np.eye(1 << c.num_qubits, dtype=complex)
    for g in c.gates:
        _apply_gate(u, g, c.num_qubits)
    return u


def good_probability(state: StateVector, flagset: GoodStateFlags) -> float:
    """Probability that every flag qubit measures 1."""
    dim = state.amplitudes.shape[0]
    mask = 0
    for q in flagset:
        if (1 << q) >= dim:
            raise ValueError(f"flag qubit {q} outside state")
        mask |= 1 << q
    idx = np.arange(dim, dtype=np.intp)
    return float(np.sum(np.abs(state.amplitudes[(idx & mask) == mask]) ** 2))


def probability_where(state: StateVector, fixed: dict[int, int]) -> float:
    """Probability of measuring the given bit values on the given qubits."""
    dim = state.amplitudes.shape[0]
    idx = np.arange(dim, dtype=np.intp)
    keep = np.ones(dim, dtype=bool)
    for q, v in fixed.items():
        keep &= ((idx >> q) & 1) == v
    return float(np.sum(np.abs(state.amplitudes[keep]) ** 2))


def sample(state: StateVector, flagset: GoodStateFlags, shots: int, seed: int | None = None) -> ShotCounts:
    """Binomial draw of good-state hits (PCG64 generator)."""
    if shots < 1:
        raise ValueError("shots must be positive; use good_probability for the exact value")
    p = good_probability(state, flagset)
    hits = int(np.random.default_rng(seed).binomial(shots, min(max(p, 0.0), 1.0)))
    return ShotCounts(shots, hits, seed)


def sample_bitstrings(state: StateVector, shots: int, seed: int | None = None) -> np.ndarray:
    """Counts over all 2**n outcomes, drawn from the exact distribution."""
    if shots < 1:
        raise ValueError("shots must be positive")
    p = state.probabilities()
    p = p / p.sum()
    return np.random.default_rng(seed).multinomial(shots, p)


def states_equal(a: StateVector, b: StateVector, tol: float = 1e-10) -> bool:
    """Equality up to global phase via |<a|b>| = 1."""
    if a.amplitudes.shape != b.amplitudes.shape:
        return False
    return abs(abs(np.vdot(a.amplitudes, b.amplitudes)) - 1.0) < tol

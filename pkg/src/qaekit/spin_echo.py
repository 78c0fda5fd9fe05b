"""Rotation-conjugation shortcut for amplified preparation circuits.

For distinct Pauli axes U != V, R_U(t) V R_U(-t) = R_U(2t) V exactly, so a
reflection sandwiched between an inverse rotation layer and a rotation layer
collapses to one doubled rotation. Applied to the amplified circuit Q^k A of
a normal-form preparation (H layer + one multiplexed Ry), the k-th power
needs k+1 oracle applications instead of 2k+1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, x, y, z
from .simulator import GoodStateFlags, unitary_of
from .state_prep import RotationOracle

_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_REFLECTION_GATE = {"X": x, "Y": y, "Z": z}


def rotation(axis: str, theta: float) -> np.ndarray:
    """2x2 rotation exp(-i*theta*sigma_axis/2)."""
    if axis not in _PAULI:
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    return np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * _PAULI[axis]


def echo_identity_gap(u_axis: str, v_axis: str, theta: float) -> float:
    """Max-entry deviation of R_U(t) V R_U(-t) from its collapsed form
    (R_U(2t) V for U != V, plain V for U == V)."""
    lhs = rotation(u_axis, theta) @ _PAULI[v_axis] @ rotation(u_axis, -theta)
    if u_axis == v_axis:
        rhs = _PAULI[v_axis]
    else:
        rhs = rotation(u_axis, 2 * theta) @ _PAULI[v_axis]
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class SpinEchoPattern:
    """The circuit fragment [R_U^(-f), V on target, R_U^(f)] awaiting rewrite.

    Only the Y rotation axis is representable at gate level (the gate set has
    no multiplexed X/Z rotations); other axes are covered by the matrix-level
    helpers above.
    """

    rotation_axis: str
    reflection: str
    oracle: RotationOracle
    num_qubits: int

    def __post_init__(self):
        if self.rotation_axis not in _PAULI or self.reflection not in _PAULI:
            raise ValueError("axes must be X, Y or Z")
        if self.rotation_axis != "Y":
            raise ValueError("gate-level patterns support only the Y rotation axis")

    def original_circuit(self) -> Circuit:
        t = self.oracle.target
        gates = (self.oracle.scaled(-1.0).gate(), _REFLECTION_GATE[self.reflection](t), self.oracle.gate())
        return Circuit(self.num_qubits, gates)


@dataclass(frozen=True)
class RewriteResult:
    circuit: Circuit
    commuting: bool  # True when U == V and the sandwich collapsed to plain V


def rewrite_conjugation(pattern: SpinEchoPattern) -> RewriteResult:
    """Collapse the sandwich to [V, R_U^(2f)] (or to [V] when U == V)."""
    t = pattern.oracle.target
    v_gate = _REFLECTION_GATE[pattern.reflection](t)
    if pattern.rotation_axis == pattern.reflection:
        return RewriteResult(Circuit(pattern.num_qubits, (v_gate,)), True)
    doubled = pattern.oracle.scaled(2.0)
    return RewriteResult(Circuit(pattern.num_qubits, (v_gate, doubled.gate())), False)


def _check_prefix(prefix: Circuit, oracle: RotationOracle) -> None:
    allowed = set(oracle.controls)
    for g in prefix.gates:
        if g.kind != "H" or g.qubits[0] not in allowed:
            raise ValueError("normal form needs an H-only prefix on the oracle controls")


def build_optimized_power(prefix: Circuit, oracle: RotationOracle, flagset: GoodStateFlags, k: int) -> Circuit:
    """Q^k A for A = oracle after prefix, built with k+1 oracle applications.

    Each amplification round contributes [Z on target, doubled negated oracle,
    prefix, S_0, prefix]; one plain oracle application closes the circuit.
    """
    from .qae import build_S0

    if k < 1:
        raise ValueError("optimized construction needs k >= 1")
    if flagset.qubits != {oracle.target}:
        raise ValueError("normal form requires flags == {oracle target}")
    _check_prefix(prefix, oracle)
    width = prefix.num_qubits
    if oracle.target >= width:
        raise ValueError("oracle target outside register")

    s0 = build_S0(width)
    doubled = oracle.scaled(-2.0)
    block = (z(oracle.target), doubled.gate()) + prefix.gates + s0.gates + prefix.gates
    gates = prefix.gates + block * k + (oracle.gate(),)
    return Circuit(width, gates)


def verify_equivalence(a: Circuit, b: Circuit, tol: float = 1e-10) -> tuple[bool, float]:
    """Compare unitaries up to global phase; returns (equivalent, max deviation).

    The phase is aligned on the largest-magnitude entry of b's unitary.
    """
    if a.num_qubits != b.num_qubits:
        raise ValueError("circuits must have equal width")
    ua, ub = unitary_of(a), unitary_of(b)
    ij = np.unravel_index(np.argmax(np.abs(ub)), ub.shape)
    if abs(ub[ij]) < 1e-12:
        return False, float("inf")
    phase = ua[ij] / ub[ij]
    phase /= abs(phase)
    dev = float(np.max(np.abs(ua - phase * ub)))
    return dev <= tol, dev


def rotation_oracle_count(c: Circuit) -> int:
    """Number of rotation-oracle applications in an un-lowered circuit."""
    return sum(1 for g in c.gates if g.kind in ("RY", "CRY", "MRY"))

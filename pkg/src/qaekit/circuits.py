"""Immutable gate-list circuit representation.

Conventions used throughout the package:
  * qubit 0 is the least-significant bit of a basis-state index,
  * circuits are ordered gate tuples, applied left to right,
  * angles are radians; Ry(t) = exp(-i*t*Y/2), Rz(t) = exp(-i*t*Z/2),
  * global phase is never tracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

GATE_KINDS = frozenset({"H", "X", "Y", "Z", "RY", "RZ", "CX", "CZ", "MCZ", "CRY", "MRY"})

_SELF_INVERSE = frozenset({"H", "X", "Y", "Z", "CX", "CZ", "MCZ"})
_ANGLED = frozenset({"RY", "RZ", "CRY"})


@dataclass(frozen=True)
class Gate:
    """One gate: a kind, target qubits, optional controls and rotation angles.

    MRY is a multiplexed Ry: ``angles[i]`` is applied to the target when the
    control register (controls[j] supplies bit j of i) holds basis value i.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None
    angles: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit in {self.kind} on {qubits}")
        if self.kind == "MRY":
            if not self.controls:
                raise ValueError("MRY needs at least one control")
            if self.angles is None or len(self.angles) != 1 << len(self.controls):
                raise ValueError("MRY angle table must have 2**num_controls entries")
        elif self.kind in _ANGLED and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls


def h(q: int) -> Gate:
    return Gate("H", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def y(q: int) -> Gate:
    return Gate("Y", (q,))


def z(q: int) -> Gate:
    return Gate("Z", (q,))


def ry(theta: float, q: int) -> Gate:
    return Gate("RY", (q,), angle=float(theta))


def rz(theta: float, q: int) -> Gate:
    return Gate("RZ", (q,), angle=float(theta))


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (target,), (control,))


def cz(a: int, b: int) -> Gate:
    return Gate("CZ", (b,), (a,))


def mcz(*qubits: int) -> Gate:
    """Phase flip of the all-ones state of ``qubits``; fully symmetric."""
    if len(qubits) < 2:
        raise ValueError("MCZ needs at least two qubits")
    return Gate("MCZ", (qubits[-1],), tuple(qubits[:-1]))


def cry(theta: float, control: int, target: int) -> Gate:
    return Gate("CRY", (target,), (control,), angle=float(theta))


def mry(angles, controls, target: int) -> Gate:
    return Gate("MRY", (target,), tuple(controls), angles=tuple(float(a) for a in angles))


@dataclass(frozen=True)
class Circuit:
    """A fixed-width ordered list of gates."""

    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g.kind} on {g.qubits} outside register of width {self.num_qubits}")

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Circuit running a's gates, then b's. Widths must match exactly."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"width mismatch: {a.num_qubits} vs {b.num_qubits}")
    return Circuit(a.num_qubits, a.gates + b.gates)


def widened(c: Circuit, num_qubits: int) -> Circuit:
    """Same gates on a wider register (new qubits idle)."""
    if num_qubits < c.num_qubits:
        raise ValueError("cannot shrink a circuit")
    return Circuit(num_qubits, c.gates)


def relabeled(c: Circuit, mapping) -> Circuit:
    """Same circuit with qubit i renamed to mapping[i] (a permutation)."""
    perm = tuple(mapping[i] for i in range(c.num_qubits))
    if sorted(perm) != list(range(c.num_qubits)):
        raise ValueError("mapping must be a permutation of all qubit indices")
    gates = tuple(
        replace(g, targets=tuple(perm[q] for q in g.targets), controls=tuple(perm[q] for q in g.controls))
        for g in c.gates
    )
    return Circuit(c.num_qubits, gates)


def adjoint_gate(g: Gate) -> Gate:
    if g.kind in _SELF_INVERSE:
        return g
    if g.kind in _ANGLED:
        return replace(g, angle=-g.angle)
    if g.kind == "MRY":
        return replace(g, angles=tuple(-a for a in g.angles))
    raise ValueError(f"no adjoint rule for {g.kind}")


def inverse(c: Circuit) -> Circuit:
    """Adjoint circuit: reversed order, each gate conjugated."""
    return Circuit(c.num_qubits, tuple(adjoint_gate(g) for g in reversed(c.gates)))


def _fmt(v: float) -> str:
    return format(v, ".15g")


def to_text(c: Circuit) -> str:
    """One gate per line: KIND target [controls...] [angles...], 15 significant digits."""
    lines = []
    for g in c.gates:
        parts = [g.kind, str(g.targets[0]), *map(str, g.controls)]
        if g.angle is not None:
            parts.append(_fmt(g.angle))
        if g.angles is not None:
            parts.extend(_fmt(a) for a in g.angles)
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")


def _mry_num_controls(ntokens: int) -> int:
    # ntokens = 1 target + m controls + 2**m angles
    m = 1
    while 1 + m + (1 << m) < ntokens:
        m += 1
    if 1 + m + (1 << m) != ntokens:
        raise ValueError(f"malformed MRY line with {ntokens} fields")
    return m


def from_text(text: str, num_qubits: int | None = None) -> Circuit:
    """Parse the to_text format. Width defaults to 1 + the highest qubit index used."""
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, *rest = line.split()
        if kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {kind!r} in dump")
        if kind in ("H", "X", "Y", "Z"):
            gates.append(Gate(kind, (int(rest[0]),)))
        elif kind in ("RY", "RZ"):
            gates.append(Gate(kind, (int(rest[0]),), angle=float(rest[1])))
        elif kind in ("CX", "CZ"):
            gates.append(Gate(kind, (int(rest[0]),), (int(rest[1]),)))
        elif kind == "CRY":
            gates.append(Gate(kind, (int(rest[0]),), (int(rest[1]),), angle=float(rest[2])))
        elif kind == "MCZ":
            gates.append(Gate(kind, (int(rest[0]),), tuple(int(t) for t in rest[1:])))
        else:  # MRY
            m = _mry_num_controls(len(rest))
            ctrls = tuple(int(t) for t in rest[1 : 1 + m])
            angles = tuple(float(t) for t in rest[1 + m :])
            gates.append(Gate(kind, (int(rest[0]),), ctrls, angles=angles))
    if num_qubits is None:
        num_qubits = 1 + max((max(g.qubits) for g in gates), default=0)
    return Circuit(num_qubits, tuple(gates))

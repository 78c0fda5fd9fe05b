"""Flagged state preparation from classical value tables.

Every builder returns a FlaggedOperator: a circuit A together with the flag
qubits whose all-ones outcome is the good state. The good-state probability
encodes a mean of function values over a uniform grid register, so amplitude
estimation of that probability estimates the corresponding Riemann sum.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, compose, h, mry, ry, widened
from .simulator import GoodStateFlags, flags


def _as_table(values) -> np.ndarray:
    t = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("value table must be a non-empty 1-d sequence")
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise ValueError("values must lie in [0, 1]")
    return t


def rotation_angles(values) -> np.ndarray:
    """angle(i) = 2*arcsin(sqrt(v_i)), so Ry(angle)|0> carries amplitude sqrt(v_i) on |1>."""
    return 2.0 * np.arcsin(np.sqrt(_as_table(values)))


@dataclass(frozen=True)
class RotationOracle:
    """Multiplexed Ry over a control register, one angle per basis value."""

    controls: tuple[int, ...]
    target: int
    angle_table: tuple[float, ...]

    def __post_init__(self):
        if len(self.angle_table) != 1 << len(self.controls):
            raise ValueError("angle table must have 2**num_controls entries")
        if self.target in self.controls:
            raise ValueError("target cannot be a control")

    def gate(self) -> Gate:
        if self.controls:
            return mry(self.angle_table, self.controls, self.target)
        return ry(self.angle_table[0], self.target)

    def as_circuit(self, num_qubits: int | None = None) -> Circuit:
        width = num_qubits or 1 + max((self.target, *self.controls))
        return Circuit(width, (self.gate(),))

    def scaled(self, factor: float) -> "RotationOracle":
        """Same oracle with every table angle multiplied by factor."""
        return RotationOracle(self.controls, self.target, tuple(factor * a for a in self.angle_table))


def build_oracle(values, controls: Sequence[int], target: int) -> RotationOracle:
    """Oracle loading sqrt(v_i) onto the target, indexed by the control register."""
    table = rotation_angles(values)
    if len(table) != 1 << len(controls):
        raise ValueError(f"{len(table)} values need {int(math.log2(len(table)))} controls, got {len(controls)}")
    return RotationOracle(tuple(controls), target, tuple(table))


@dataclass(frozen=True)
class NormalForm:
    """A = prefix (H layer) followed by one multiplexed Ry; enables the
    conjugation shortcut in grover powers."""

    prefix: Circuit
    oracle: RotationOracle


@dataclass(frozen=True)
class FlaggedOperator:
    circuit: Circuit
    flags: GoodStateFlags
    value_semantics: str
    normal_form: NormalForm | None = None

    def __post_init__(self):
        if not isinstance(self.flags, GoodStateFlags):
            object.__setattr__(self, "flags", GoodStateFlags(frozenset(self.flags)))
        if any(q >= self.circuit.num_qubits for q in self.flags):
            raise ValueError("flag qubit outside the circuit")

    @property
    def num_qubits(self) -> int:
        return self.circuit.num_qubits


def _uniform_prefix(controls: Sequence[int], num_qubits: int) -> Circuit:
    return Circuit(num_qubits, tuple(h(q) for q in controls))


def from_rotation_oracle(oracle: RotationOracle, value_semantics: str = "mean(values)") -> FlaggedOperator:
    """H layer on the oracle controls, then the oracle; good state = target |1>."""
    width = 1 + max((oracle.target, *oracle.controls)) if oracle.controls else oracle.target + 1
    prefix = _uniform_prefix(oracle.controls, width)
    circuit = Circuit(width, prefix.gates + (oracle.gate(),))
    return FlaggedOperator(circuit, flags(oracle.target), value_semantics, NormalForm(prefix, oracle))


def load_function(values) -> FlaggedOperator:
    """Good-state probability = mean of the values over the uniform register."""
    table = _as_table(values)
    n = int(math.log2(table.size))
    if 1 << n != table.size:
        raise ValueError("value table length must be a power of two")
    oracle = build_oracle(table, tuple(range(n)), n)
    return from_rotation_oracle(oracle)


def multiply(f: RotationOracle, g: RotationOracle) -> FlaggedOperator:
    """Good-state probability = mean of f*g; good state = both targets |1>.

    Both oracles must read the same control register and write distinct targets.
    """
    if f.controls != g.controls:
        raise ValueError("oracles must share one control register")
    if f.target == g.target:
        raise ValueError("oracles must have distinct targets")
    width = 1 + max((f.target, g.target, *f.controls)) if f.controls else 1 + max(f.target, g.target)
    gates = _uniform_prefix(f.controls, width).gates + (f.gate(), g.gate())
    return FlaggedOperator(Circuit(width, gates), flags(f.target, g.target), "mean(f*g)")


def add(g: RotationOracle, hh: RotationOracle, ancilla: int) -> FlaggedOperator:
    """Linear combination block: per control value the target carries (g+h)/2.

    The ancilla is put in superposition, g fires on its |0> branch, h on its
    |1> branch, and a closing H mixes the branches. The ancilla is NOT a flag;
    estimates read off the target must be doubled classically.
    """
    if g.controls != hh.controls:
        raise ValueError("oracles must share one control register")
    if g.target != hh.target:
        raise ValueError("addition needs a shared target")
    used = {g.target, *g.controls}
    if ancilla in used:
        raise ValueError("ancilla must be a fresh qubit")
    width = 1 + max(ancilla, *used)
    m = len(g.controls)
    zeros = (0.0,) * (1 << m)
    ctrls = g.controls + (ancilla,)  # ancilla is the top table bit
    g_ext = mry(g.angle_table + zeros, ctrls, g.target)
    h_ext = mry(zeros + hh.angle_table, ctrls, g.target)
    gates = (h(ancilla), g_ext, h_ext, h(ancilla))
    return FlaggedOperator(Circuit(width, gates), flags(g.target),
                           "(g+h)/2 per control value; double estimates classically")


def reduce_flags(op: FlaggedOperator, ancilla: int) -> FlaggedOperator:
    """AND all flag qubits onto a fresh ancilla; new flag set = {ancilla}."""
    flag_qubits = sorted(op.flags.qubits)
    if ancilla < op.num_qubits and any(g for g in op.circuit.gates if ancilla in g.qubits):
        raise ValueError("ancilla must be unused by the circuit")
    if ancilla in op.flags.qubits:
        raise ValueError("ancilla cannot be an existing flag")
    width = max(op.num_qubits, ancilla + 1)
    mcx = (h(ancilla), Gate("MCZ", (ancilla,), tuple(flag_qubits)), h(ancilla))
    circuit = Circuit(width, widened(op.circuit, width).gates + mcx)
    return FlaggedOperator(circuit, flags(ancilla), op.value_semantics)


@dataclass(frozen=True)
class MarkovProcessSpec:
    """A discretized process: per-step register sizes, an initial distribution
    table and one transition table per later step, all given as callables on
    grid indices returning values in [0, 1]."""

    register_sizes: tuple[int, ...]
    initial: Callable[[int], float]
    transitions: tuple[Callable[[int, int], float], ...]

    def __post_init__(self):
        if len(self.register_sizes) < 1 or any(s < 1 for s in self.register_sizes):
            raise ValueError("need at least one register of positive size")
        if len(self.transitions) != len(self.register_sizes) - 1:
            raise ValueError("need one transition per step after the first")


def _registers(sizes: Sequence[int]) -> list[tuple[int, ...]]:
    regs, base = [], 0
    for s in sizes:
        regs.append(tuple(range(base, base + s)))
        base += s
    return regs


def load_process(mspec: MarkovProcessSpec) -> FlaggedOperator:
    """Path-product loader: one flag per step, good probability
    (1/2**n) * sum over paths of f0(x0) * prod ft(x_{t-1}, x_t)."""
    regs = _registers(mspec.register_sizes)
    n_state = sum(mspec.register_sizes)
    ancillas = tuple(range(n_state, n_state + len(regs)))
    width = n_state + len(ancillas)

    gates = [h(q) for q in range(n_state)]
    table0 = [mspec.initial(i) for i in range(1 << mspec.register_sizes[0])]
    gates.append(build_oracle(table0, regs[0], ancillas[0]).gate())
    for t, ft in enumerate(mspec.transitions, start=1):
        n_prev = mspec.register_sizes[t - 1]
        n_cur = mspec.register_sizes[t]
        table = [
            ft(i_prev, i_cur)
            for i_cur in range(1 << n_cur)
            for i_prev in range(1 << n_prev)
        ]
        # table index = i_prev | (i_cur << n_prev): previous register fills the low bits
        gates.append(build_oracle(table, regs[t - 1] + regs[t], ancillas[t]).gate())
    return FlaggedOperator(Circuit(width, tuple(gates)), GoodStateFlags(frozenset(ancillas)),
                           "mean over paths of f0 * prod(ft)")


def process_reference(mspec: MarkovProcessSpec) -> float:
    """Classical nested sum matching load_process's good-state probability."""
    n_state = sum(mspec.register_sizes)
    sizes = [1 << s for s in mspec.register_sizes]

    def walk(step: int, prev: int) -> float:
        if step == len(sizes):
            return 1.0
        return sum(mspec.transitions[step - 1](prev, cur) * walk(step + 1, cur) for cur in range(sizes[step]))

    total = sum(mspec.initial(i0) * walk(1, i0) for i0 in range(sizes[0]))
    return total / (1 << n_state)


def load_value_table(path) -> np.ndarray:
    """Read an 'index,value' CSV into a dense table (missing indices are an error)."""
    rows = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    if rows.shape[1] != 2:
        raise ValueError("value table CSV must have two columns: index,value")
    idx = rows[:, 0].astype(int)
    if sorted(idx.tolist()) != list(range(len(idx))):
        raise ValueError("value table CSV must cover indices 0..N-1 exactly once")
    out = np.empty(len(idx), dtype=float)
    out[idx] = rows[:, 1]
    return out

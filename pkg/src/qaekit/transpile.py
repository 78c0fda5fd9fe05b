"""Lowering to a CNOT + single-qubit basis and CNOT accounting.

Multiplexed rotations lower by the Gray-code walk (2**m CNOTs for m
controls), CZ conjugates one CNOT with Hadamards, and a three-qubit phase
flip uses the standard 6-CNOT decomposition. On a linear chain, non-adjacent
CNOTs are routed with restore-style SWAP sandwiches (3 CNOTs each) and a
cancellation pass removes SWAP pairs that straddle only relabelable gates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, cx, h, ry, rz
from .state_prep import FlaggedOperator

_QUARTER = math.pi / 4


@dataclass(frozen=True)
class TopologySpec:
    kind: str  # "all_to_all" or "linear_chain"
    initial_layout: tuple[int, ...] | None = None  # logical -> physical

    def __post_init__(self):
        if self.kind not in ("all_to_all", "linear_chain"):
            raise ValueError("topology kind must be all_to_all or linear_chain")


ALL_TO_ALL = TopologySpec("all_to_all")
LINEAR_CHAIN = TopologySpec("linear_chain")


def _ucry_gates(angles, controls, target) -> list[Gate]:
    """Gray-code multiplexed Ry: 2**m rotations interleaved with 2**m CNOTs.

    Rotation j sees the X-parity <b(i), gray(j)> on control value i, so the
    coefficient angles are the scaled parity transform of the table.
    """
    m = len(controls)
    n_entries = 1 << m
    phis = []
    for j in range(n_entries):
        gj = j ^ (j >> 1)
        acc = 0.0
        for i, th in enumerate(angles):
            acc += th if bin(i & gj).count("1") % 2 == 0 else -th
        phis.append(acc / n_entries)
    gates: list[Gate] = []
    for j in range(n_entries):
        if phis[j] != 0.0:
            gates.append(ry(phis[j], target))
        if j == n_entries - 1:
            ctl = m - 1  # closing CNOT wraps to the top control
        else:
            ctl = ((j + 1) & -(j + 1)).bit_length() - 1
        gates.append(cx(controls[ctl], target))
    return gates


def _ccz_gates(a: int, b: int, c: int) -> list[Gate]:
    """Phase flip of |111> on (a, b, c) with 6 CNOTs and eighth turns."""
    t = lambda q: rz(_QUARTER, q)
    tdg = lambda q: rz(-_QUARTER, q)
    return [
        cx(b, c), tdg(c), cx(a, c), t(c), cx(b, c), tdg(c), cx(a, c),
        t(b), t(c), cx(a, b), t(a), tdg(b), cx(a, b),
    ]


def _lower_gate(g: Gate) -> list[Gate]:
    if g.kind in ("H", "X", "Y", "Z", "RY", "RZ", "CX"):
        return [g]
    if g.kind == "CZ":
        t, c = g.targets[0], g.controls[0]
        return [h(t), cx(c, t), h(t)]
    if g.kind == "CRY":
        return _ucry_gates((0.0, g.angle), g.controls, g.targets[0])
    if g.kind == "MRY":
        return _ucry_gates(g.angles, g.controls, g.targets[0])
    if g.kind == "MCZ":
        qs = sorted(g.qubits)
        if len(qs) == 2:
            return [h(qs[1]), cx(qs[0], qs[1]), h(qs[1])]
        if len(qs) == 3:
            return _ccz_gates(*qs)
        raise ValueError(f"phase flips on {len(qs)} qubits are not supported by the lowering")
    raise ValueError(f"cannot lower gate kind {g.kind}")


class _Swap:
    __slots__ = ("a", "b")

    def __init__(self, a: int, b: int):
        self.a, self.b = a, b

    @property
    def pair(self) -> frozenset:
        return frozenset((self.a, self.b))


def _relabel_1q(g: Gate, a: int, b: int) -> Gate:
    swap = {a: b, b: a}
    return Gate(g.kind, tuple(swap.get(q, q) for q in g.targets), angle=g.angle)


def _route_chain(gates: list[Gate], layout: tuple[int, ...]) -> list:
    """Map to physical qubits; sandwich non-adjacent CNOTs between SWAP walks."""
    stream: list = []
    for g in gates:
        if g.kind == "CX":
            pc, pt = layout[g.controls[0]], layout[g.targets[0]]
            if abs(pc - pt) == 1:
                stream.append(cx(pc, pt))
                continue
            step = 1 if pt > pc else -1
            walk = [(p, p + step) for p in range(pc, pt - step, step)]
            stream.extend(_Swap(a, b) for a, b in walk)
            stream.append(cx(pt - step, pt))
            stream.extend(_Swap(a, b) for a, b in reversed(walk))
        elif len(g.qubits) == 1:
            stream.append(Gate(g.kind, (layout[g.targets[0]],), angle=g.angle))
        else:
            raise ValueError("routing expects a lowered circuit (CNOT + 1q only)")
    return stream


def _cancel_swap_pairs(stream: list) -> list:
    out = list(stream)
    i = 0
    while i < len(out):
        item = out[i]
        if not isinstance(item, _Swap):
            i += 1
            continue
        a, b = item.a, item.b
        relabel_at: list[int] = []
        j = i + 1
        while j < len(out):
            nxt = out[j]
            if isinstance(nxt, _Swap):
                if nxt.pair == item.pair:
                    for idx in relabel_at:
                        out[idx] = _relabel_1q(out[idx], a, b)
                    del out[j]
                    del out[i]
                    i = max(i - 1, 0)
                    break
                if nxt.pair & item.pair:
                    i += 1
                    break
                j += 1
            else:
                qs = set(nxt.qubits)
                if not qs & {a, b}:
                    j += 1
                elif len(qs) == 1:
                    relabel_at.append(j)
                    j += 1
                else:
                    i += 1
                    break
        else:
            i += 1
    return out


def _cancel_cx_pairs(gates: list[Gate]) -> list[Gate]:
    out = list(gates)
    i = 0
    while i < len(out):
        g = out[i]
        if g.kind != "CX":
            i += 1
            continue
        pair = set(g.qubits)
        j = i + 1
        while j < len(out):
            nxt = out[j]
            if set(nxt.qubits) & pair:
                if nxt.kind == "CX" and nxt.qubits == g.qubits:
                    del out[j]
                    del out[i]
                    i = max(i - 1, 0)
                else:
                    i += 1
                break
            j += 1
        else:
            i += 1
    return out


def _expand_swaps(stream: list) -> list[Gate]:
    gates: list[Gate] = []
    for item in stream:
        if isinstance(item, _Swap):
            gates.extend((cx(item.a, item.b), cx(item.b, item.a), cx(item.a, item.b)))
        else:
            gates.append(item)
    return gates


def default_layout(c: Circuit, topo: TopologySpec) -> tuple[int, ...]:
    """Identity layout, except width-3 chains put the busiest CNOT qubit in the middle."""
    if topo.initial_layout is not None:
        if sorted(topo.initial_layout) != list(range(c.num_qubits)):
            raise ValueError("initial_layout must be a permutation of the qubits")
        return tuple(topo.initial_layout)
    if topo.kind == "linear_chain" and c.num_qubits == 3:
        flat = [lg for g in c.gates for lg in _lower_gate(g)]
        degree = [0, 0, 0]
        for g in flat:
            if g.kind == "CX":
                for q in g.qubits:
                    degree[q] += 1
        center = int(np.argmax(degree))  # ties -> lowest index
        rest = [q for q in range(3) if q != center]
        layout = [0, 0, 0]
        layout[center] = 1
        layout[rest[0]], layout[rest[1]] = 0, 2
        return tuple(layout)
    return tuple(range(c.num_qubits))


def lower(c: Circuit, topo: TopologySpec = ALL_TO_ALL, layout: tuple[int, ...] | None = None) -> Circuit:
    """Rewrite to the CNOT + 1q basis; on a chain, also route and cancel.

    The result is unitary-equivalent to c up to global phase, with qubits
    renamed by the layout when one applies (see default_layout).
    """
    flat = [lg for g in c.gates for lg in _lower_gate(g)]
    if topo.kind == "all_to_all":
        return Circuit(c.num_qubits, tuple(flat))
    lay = layout if layout is not None else default_layout(c, topo)
    stream = _route_chain(flat, lay)
    stream = _cancel_swap_pairs(stream)
    gates = _cancel_cx_pairs(_expand_swaps(stream))
    lowered = Circuit(c.num_qubits, tuple(gates))
    for g in lowered.gates:
        if g.kind == "CX" and abs(g.controls[0] - g.targets[0]) != 1:
            raise AssertionError("router left a non-adjacent CNOT")
    return lowered


@dataclass(frozen=True)
class CountReport:
    num_qubits: int
    k: int
    optimized: bool
    topology: str
    drop_final: bool
    cnot_count: int
    layout: tuple[int, ...]
    dropped_cnot: tuple[int, int] | None  # (control, target) removed at the end
    postprocess: str | None


def drop_final_cnot(c: Circuit) -> tuple[Circuit, tuple[int, int]]:
    """Remove the last CNOT; its effect is recovered by XOR-ing the measured bits."""
    for i in range(len(c.gates) - 1, -1, -1):
        if c.gates[i].kind == "CX":
            g = c.gates[i]
            return Circuit(c.num_qubits, c.gates[:i] + c.gates[i + 1 :]), (g.controls[0], g.targets[0])
    raise ValueError("circuit has no CNOT to drop")


def count_cnots(
    op: FlaggedOperator,
    k: int,
    optimized: bool = True,
    topo: TopologySpec = ALL_TO_ALL,
    drop_final: bool = False,
) -> CountReport:
    """CNOTs in the lowered amplified circuit Q^k A of a preparation operator."""
    from .qae import grover_power

    circuit = grover_power(op, k, optimized=optimized)
    layout = default_layout(circuit, topo)
    lowered = lower(circuit, topo, layout)
    dropped = None
    note = None
    if drop_final:
        lowered, dropped = drop_final_cnot(lowered)
        note = (
            f"final CNOT (control {dropped[0]}, target {dropped[1]}) removed: "
            f"read flag bit {dropped[1]} as (measured {dropped[1]}) XOR (measured {dropped[0]})"
        )
    return CountReport(
        num_qubits=op.num_qubits,
        k=k,
        optimized=optimized,
        topology=topo.kind,
        drop_final=drop_final,
        cnot_count=lowered.count("CX"),
        layout=layout,
        dropped_cnot=dropped,
        postprocess=note,
    )

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaekit.circuits import (
    Circuit, cry, cx, cz, h, mcz, mry, relabeled, ry, rz, x, z,
)
from qaekit.problems import sin2_problem
from qaekit.simulator import unitary_of
from qaekit.transpile import (
    ALL_TO_ALL,
    LINEAR_CHAIN,
    CountReport,
    TopologySpec,
    count_cnots,
    default_layout,
    drop_final_cnot,
    lower,
)

from helpers import up_to_phase


def test_topology_validation():
    with pytest.raises(ValueError):
        TopologySpec("star")
    t = TopologySpec("linear_chain", (2, 0, 1))
    assert t.initial_layout == (2, 0, 1)


def _lowered_kinds_ok(c):
    return all(g.kind in ("H", "X", "Y", "Z", "RY", "RZ", "CX") for g in c.gates)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_mry_lowering_equivalence_and_count(m):
    rng = np.random.default_rng(m)
    angles = tuple(rng.uniform(-3, 3, 1 << m))
    c = Circuit(m + 1, (mry(angles, tuple(range(m)), m),))
    low = lower(c)
    assert _lowered_kinds_ok(low)
    assert low.count("CX") == 1 << m
    assert low.gates[-1].kind == "CX"  # multiplexer ends on a CNOT
    assert up_to_phase(low, c) < 1e-10


def test_cry_lowering():
    c = Circuit(2, (cry(1.234, 0, 1),))
    low = lower(c)
    assert low.count("CX") == 2
    assert up_to_phase(low, c) < 1e-12


def test_cz_ccz_lowering():
    c = Circuit(2, (cz(0, 1),))
    low = lower(c)
    assert low.count("CX") == 1 and low.count("H") == 2
    assert up_to_phase(low, c) < 1e-12
    c3 = Circuit(3, (mcz(0, 1, 2),))
    low3 = lower(c3)
    assert low3.count("CX") == 6
    assert up_to_phase(low3, c3) < 1e-12
    c2 = Circuit(3, (mcz(1, 2),))  # two-qubit phase flip = CZ
    assert up_to_phase(lower(c2), c2) < 1e-12


def test_mcz_above_three_qubits_rejected():
    c = Circuit(4, (mcz(0, 1, 2, 3),))
    with pytest.raises(ValueError):
        lower(c)


def test_passthrough_gates_untouched():
    gates = (h(0), x(1), ry(0.3, 0), rz(-0.2, 1), cx(0, 1), z(0))
    c = Circuit(2, gates)
    assert lower(c).gates == gates


def test_chain_lowering_is_relabeled_equivalent():
    rng = np.random.default_rng(41)
    for trial in range(6):
        gates = []
        for _ in range(6):
            kind = rng.integers(0, 4)
            if kind == 0:
                gates.append(h(int(rng.integers(0, 3))))
            elif kind == 1:
                gates.append(ry(float(rng.uniform(-2, 2)), int(rng.integers(0, 3))))
            elif kind == 2:
                a, b = rng.choice(3, size=2, replace=False)
                gates.append(cx(int(a), int(b)))
            else:
                gates.append(mcz(0, 1, 2))
        c = Circuit(3, tuple(gates))
        layout = default_layout(c, LINEAR_CHAIN)
        low = lower(c, LINEAR_CHAIN, layout)
        for g in low.gates:
            if g.kind == "CX":
                assert abs(g.controls[0] - g.targets[0]) == 1
        ref = relabeled(c, {i: layout[i] for i in range(3)})
        assert up_to_phase(low, ref) < 1e-9


def test_chain_explicit_layout_respected():
    c = Circuit(3, (cx(0, 2),))
    low = lower(c, LINEAR_CHAIN, layout=(0, 1, 2))
    # 0 and 2 are chain ends: routing must spend extra CNOTs
    assert low.count("CX") > 1
    ref = relabeled(c, {0: 0, 1: 1, 2: 2})
    assert up_to_phase(low, ref) < 1e-10
    with pytest.raises(ValueError):
        default_layout(c, TopologySpec("linear_chain", (0, 0, 1)))


def test_default_layout_centers_busiest_qubit():
    # qubit 2 touches every CNOT, so it belongs at physical position 1
    c = Circuit(3, (cx(0, 2), cx(1, 2), cx(2, 0)))
    assert default_layout(c, LINEAR_CHAIN) == (0, 2, 1)
    # all-to-all never relabels
    assert default_layout(c, ALL_TO_ALL) == (0, 1, 2)
    # width != 3 keeps identity
    c2 = Circuit(2, (cx(0, 1),))
    assert default_layout(c2, LINEAR_CHAIN) == (0, 1)


_EXPECTED = {
    # (qubits, optimized, drop_final, topology) -> per-k counts for k = 1, 2, 4, 8, 16
    (2, True, True, "all_to_all"): (4, 7, 13, 25, 49),
    (2, False, False, "all_to_all"): (7, 12, 22, 42, 82),
    (3, True, True, "all_to_all"): (13, 23, 43, 83, 163),
    (3, False, False, "all_to_all"): (18, 32, 60, 116, 228),
}


@pytest.mark.parametrize("key,counts", sorted(_EXPECTED.items()))
def test_cnot_counts_reference_table(key, counts):
    qubits, optimized, drop, kind = key
    topo = ALL_TO_ALL if kind == "all_to_all" else LINEAR_CHAIN
    prob = sin2_problem(qubits - 1, 1.0, "left")
    for k, want in zip((1, 2, 4, 8, 16), counts):
        rep = count_cnots(prob.operator, k, optimized=optimized, topo=topo, drop_final=drop)
        assert rep.cnot_count == want, (key, k, rep.cnot_count)


def test_cnot_count_closed_forms():
    # 2 qubits: optimized+drop = 3k+1, plain = 5k+2
    prob = sin2_problem(1, 1.0, "left")
    for k in (3, 5, 7):
        assert count_cnots(prob.operator, k, True, ALL_TO_ALL, True).cnot_count == 3 * k + 1
        assert count_cnots(prob.operator, k, False, ALL_TO_ALL, False).cnot_count == 5 * k + 2


def test_chain_counts_are_linear_in_k():
    prob = sin2_problem(2, 1.0, "left")
    counts = [count_cnots(prob.operator, k, True, LINEAR_CHAIN, True).cnot_count for k in (1, 2, 4)]
    # affine in k: extrapolate and check
    slope = (counts[1] - counts[0]) / 1
    assert counts[2] == counts[0] + 3 * slope
    rep = count_cnots(prob.operator, 1, True, LINEAR_CHAIN, True)
    assert rep.topology == "linear_chain"
    assert rep.layout == (0, 2, 1)  # target of every multiplexer sits mid-chain


def test_chain_count_equivalence_still_holds():
    prob = sin2_problem(2, 1.0, "left")
    from qaekit.qae import grover_power

    circ = grover_power(prob.operator, 1, optimized=True)
    layout = default_layout(circ, LINEAR_CHAIN)
    low = lower(circ, LINEAR_CHAIN, layout)
    ref = relabeled(circ, {i: layout[i] for i in range(3)})
    assert up_to_phase(low, ref) < 1e-9


def test_drop_final_cnot():
    c = Circuit(2, (h(0), cx(0, 1), ry(0.3, 0)))
    dropped, pair = drop_final_cnot(c)
    assert pair == (0, 1)
    assert dropped.gates == (h(0), ry(0.3, 0))
    with pytest.raises(ValueError):
        drop_final_cnot(Circuit(2, (h(0),)))


def test_count_report_fields():
    prob = sin2_problem(1, 1.0, "left")
    rep = count_cnots(prob.operator, 2, optimized=True, topo=ALL_TO_ALL, drop_final=True)
    assert isinstance(rep, CountReport)
    assert rep.k == 2 and rep.optimized and rep.drop_final
    assert rep.num_qubits == 2
    assert rep.dropped_cnot is not None
    assert "XOR" in rep.postprocess
    rep_plain = count_cnots(prob.operator, 2, optimized=False)
    assert rep_plain.dropped_cnot is None and rep_plain.postprocess is None


def test_dropped_cnot_readout_rule():
    # dropping the closing CNOT keeps the good probability recoverable:
    # P(flag) of the full circuit equals P(target XOR control) of the dropped one
    from qaekit.simulator import probability_where, simulate

    prob = sin2_problem(1, 1.0, "midpoint")
    low = lower(prob.operator.circuit)
    dropped, (ctl, tgt) = drop_final_cnot(low)
    s_full = simulate(low)
    s_drop = simulate(dropped)
    p_full = probability_where(s_full, {tgt: 1})
    p_xor = probability_where(s_drop, {ctl: 0, tgt: 1}) + probability_where(s_drop, {ctl: 1, tgt: 0})
    assert abs(p_full - p_xor) < 1e-12


_angle = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)


@given(st.lists(_angle, min_size=4, max_size=4))
@settings(max_examples=30, deadline=None)
def test_mry_lowering_property(angles):
    c = Circuit(3, (mry(tuple(angles), (0, 1), 2),))
    assert up_to_phase(lower(c), c) < 1e-9

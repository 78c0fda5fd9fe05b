import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaekit.circuits import Circuit, h
from qaekit.simulator import flags, good_probability, probability_where, simulate
from qaekit.state_prep import (
    FlaggedOperator,
    MarkovProcessSpec,
    RotationOracle,
    add,
    build_oracle,
    from_rotation_oracle,
    load_function,
    load_process,
    load_value_table,
    multiply,
    process_reference,
    reduce_flags,
    rotation_angles,
)

from helpers import mean_product, random_unit_tables


def test_rotation_angles_endpoints():
    got = rotation_angles([0.0, 0.25, 1.0])
    assert np.allclose(got, [0.0, 2 * math.asin(0.5), math.pi])
    with pytest.raises(ValueError):
        rotation_angles([-0.1])
    with pytest.raises(ValueError):
        rotation_angles([1.1])
    with pytest.raises(ValueError):
        rotation_angles([[0.1, 0.2]])


def test_rotation_oracle_validation():
    with pytest.raises(ValueError):
        RotationOracle((0, 1), 0, (0.1, 0.2, 0.3, 0.4))  # target among controls
    with pytest.raises(ValueError):
        RotationOracle((0,), 1, (0.1,))  # table too short
    orc = RotationOracle((), 0, (0.4,))
    assert orc.gate().kind == "RY"
    scaled = orc.scaled(-2.0)
    assert scaled.angle_table == (-0.8,)


def test_load_function_mean():
    rng = np.random.default_rng(11)
    for n in (1, 2, 3):
        table = rng.random(1 << n)
        op = load_function(table)
        state = simulate(op.circuit)
        assert abs(good_probability(state, op.flags) - table.mean()) < 1e-12
    with pytest.raises(ValueError):
        load_function([0.1, 0.2, 0.3])  # not a power of two


def test_load_function_per_branch_amplitudes():
    table = [0.0, 0.36, 0.81, 1.0]
    op = load_function(table)
    state = simulate(op.circuit)
    for i, v in enumerate(table):
        # joint P(register = i, flag = 1) = v_i / 4
        got = probability_where(state, {0: i & 1, 1: (i >> 1) & 1, 2: 1})
        assert abs(got - v / 4) < 1e-12


def test_multiply_means_product():
    rng = np.random.default_rng(5)
    n = 2
    f_t, g_t = random_unit_tables(rng, n, 2)
    f = build_oracle(f_t, (0, 1), 2)
    g = build_oracle(g_t, (0, 1), 3)
    op = multiply(f, g)
    assert sorted(op.flags) == [2, 3]
    state = simulate(op.circuit)
    assert abs(good_probability(state, op.flags) - mean_product(f_t, g_t)) < 1e-12
    with pytest.raises(ValueError):
        multiply(f, build_oracle(g_t, (0, 1), 2))  # same target
    with pytest.raises(ValueError):
        multiply(f, build_oracle(rng.random(2), (0,), 3))  # different controls


def test_add_halves_the_sum():
    rng = np.random.default_rng(9)
    n = 2
    g_t, h_t = rng.random(1 << n) * 0.5, rng.random(1 << n) * 0.5
    g = build_oracle(g_t, (0, 1), 2)
    hh = build_oracle(h_t, (0, 1), 2)
    op = add(g, hh, ancilla=3)
    assert sorted(op.flags) == [2]
    # the block needs a uniform register in front of it
    full = Circuit(op.circuit.num_qubits, tuple(h(q) for q in (0, 1)) + op.circuit.gates)
    state = simulate(full)
    # summed over the ancilla, P(target=1, register=i) = ((g+h)/2)_i / 2**n
    for i in range(1 << n):
        got = probability_where(state, {0: i & 1, 1: (i >> 1) & 1, 2: 1})
        assert abs(got - (g_t[i] + h_t[i]) / 2 / (1 << n)) < 1e-12
    assert abs(good_probability(state, op.flags) - (g_t.mean() + h_t.mean()) / 2) < 1e-12
    with pytest.raises(ValueError):
        add(g, build_oracle(h_t, (0, 1), 3), ancilla=4)  # different targets
    with pytest.raises(ValueError):
        add(g, hh, ancilla=1)  # ancilla collides


def test_reduce_flags_ands_the_flags():
    rng = np.random.default_rng(2)
    f_t, g_t = random_unit_tables(rng, 2, 2)
    op = multiply(build_oracle(f_t, (0, 1), 2), build_oracle(g_t, (0, 1), 3))
    red = reduce_flags(op, ancilla=4)
    assert sorted(red.flags) == [4]
    sa = simulate(op.circuit)
    sb = simulate(red.circuit)
    assert abs(good_probability(sa, op.flags) - good_probability(sb, red.flags)) < 1e-12
    with pytest.raises(ValueError):
        reduce_flags(op, ancilla=3)  # existing flag
    with pytest.raises(ValueError):
        reduce_flags(op, ancilla=0)  # used by the circuit


def test_flagged_operator_validation():
    c = Circuit(2, (h(0),))
    op = FlaggedOperator(c, frozenset({1}), "test")
    assert sorted(op.flags) == [1]  # raw frozensets are coerced
    with pytest.raises(ValueError):
        FlaggedOperator(c, frozenset({2}), "test")


def test_load_process_matches_reference():
    spec = MarkovProcessSpec(
        register_sizes=(1, 2),
        initial=lambda i: (0.3, 0.9)[i],
        transitions=(lambda i, j: ((0.1, 0.5, 0.7, 0.2)[j] + i * 0.05),),
    )
    op = load_process(spec)
    assert op.num_qubits == 1 + 2 + 2  # state bits + one flag per step
    state = simulate(op.circuit)
    got = good_probability(state, op.flags)
    assert abs(got - process_reference(spec)) < 1e-12


def test_process_spec_validation():
    with pytest.raises(ValueError):
        MarkovProcessSpec((), lambda i: 0.5, ())
    with pytest.raises(ValueError):
        MarkovProcessSpec((1, 1), lambda i: 0.5, ())  # missing transition


def test_load_value_table(tmp_path):
    p = tmp_path / "vals.csv"
    p.write_text("1,0.25\n0,0.5\n")
    assert np.allclose(load_value_table(p), [0.5, 0.25])
    bad = tmp_path / "bad.csv"
    bad.write_text("0,0.5\n2,0.25\n")
    with pytest.raises(ValueError):
        load_value_table(bad)
    bad3 = tmp_path / "bad3.csv"
    bad3.write_text("0,0.5,9\n")
    with pytest.raises(ValueError):
        load_value_table(bad3)


def test_normal_form_shape():
    op = load_function([0.2, 0.7])
    assert op.normal_form is not None
    assert op.normal_form.prefix.gates == (h(0),)
    assert op.normal_form.oracle.controls == (0,)


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2 ** 31))
@settings(max_examples=40, deadline=None)
def test_load_function_mean_property(n, seed):
    table = np.random.default_rng(seed).random(1 << n)
    op = load_function(table)
    got = good_probability(simulate(op.circuit), op.flags)
    assert abs(got - table.mean()) < 1e-10

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaekit.circuits import Circuit, h
from qaekit.qae import (
    MlaeResult,
    MlaeSchedule,
    build_Q,
    build_S0,
    build_S_psi0,
    default_schedule,
    grover_power,
    log_likelihood,
    mlae_estimate,
    oracle_calls,
)
from qaekit.simulator import flags, good_probability, simulate, unitary_of
from qaekit.state_prep import load_function


def test_S0_is_zero_reflection():
    for n in (1, 2, 3):
        u = unitary_of(build_S0(n))
        ref = np.eye(1 << n)
        ref[0, 0] = -1
        assert np.allclose(u, ref)


def test_S_psi0_flips_good_states():
    u = unitary_of(build_S_psi0(2, flags(1)))
    assert np.allclose(u, np.diag([1, 1, -1, -1]))
    u = unitary_of(build_S_psi0(2, flags(0, 1)))
    assert np.allclose(u, np.diag([1, 1, 1, -1]))
    u = unitary_of(build_S_psi0(3, flags(0, 1, 2)))
    assert np.allclose(u, np.diag([1] * 7 + [-1]))
    with pytest.raises(ValueError):
        build_S_psi0(2, flags(2))


def test_amplification_law_random_tables():
    rng = np.random.default_rng(17)
    for _ in range(4):
        table = rng.random(4) * 0.6
        op = load_function(table)
        a = table.mean()
        theta = math.asin(math.sqrt(a))
        for k in range(4):
            got = good_probability(simulate(grover_power(op, k)), op.flags)
            assert abs(got - math.sin((2 * k + 1) * theta) ** 2) < 1e-10


def test_grover_power_k0_is_a():
    op = load_function([0.3, 0.8])
    assert grover_power(op, 0).gates == op.circuit.gates
    with pytest.raises(ValueError):
        grover_power(op, -1)


def test_build_Q_unitary_is_product():
    op = load_function([0.25, 0.5])
    q = unitary_of(build_Q(op))
    a = unitary_of(op.circuit)
    s0 = unitary_of(build_S0(2))
    spsi = unitary_of(build_S_psi0(2, op.flags))
    assert np.max(np.abs(q - a @ s0 @ a.conj().T @ spsi)) < 1e-12


def test_oracle_calls():
    powers, shots = (0, 1, 2, 4), (10, 10, 10, 10)
    assert oracle_calls(powers, shots) == 10 * (1 + 3 + 5 + 9)
    assert oracle_calls(powers, shots, optimized=True) == 10 * (1 + 2 + 3 + 5)


def test_schedule_validation():
    with pytest.raises(ValueError):
        MlaeSchedule((), ())
    with pytest.raises(ValueError):
        MlaeSchedule((0, 1), (5,))
    with pytest.raises(ValueError):
        MlaeSchedule((1, 0), (5, 5))
    with pytest.raises(ValueError):
        MlaeSchedule((0, 0), (5, 5))
    with pytest.raises(ValueError):
        MlaeSchedule((-1,), (5,))
    with pytest.raises(ValueError):
        MlaeSchedule((0,), (0,))
    s = default_schedule(3, 64)
    assert s.powers == (0, 1, 2, 4, 8)
    assert s.shots == (64,) * 5
    assert MlaeSchedule.from_dict(s.to_dict()) == s


def test_mlae_exact_mode_recovers_a():
    # fractional hits = exact probabilities with shots=1
    for a in (0.05, 0.25, 0.7):
        theta = math.asin(math.sqrt(a))
        sched = default_schedule(3, 1)
        hits = [math.sin((2 * k + 1) * theta) ** 2 for k in sched.powers]
        res = mlae_estimate(sched, hits)
        assert abs(res.a_hat - a) < 1e-9


def test_mlae_sampled_hits():
    a = 0.3
    theta = math.asin(math.sqrt(a))
    rng = np.random.default_rng(23)
    sched = default_schedule(4, 4096)
    hits = [rng.binomial(m, math.sin((2 * k + 1) * theta) ** 2)
            for k, m in zip(sched.powers, sched.shots)]
    res = mlae_estimate(sched, hits)
    assert abs(res.a_hat - a) < 5e-3
    assert isinstance(res, MlaeResult)
    d = res.to_dict()
    assert d["a_hat"] == res.a_hat and d["schedule"]["powers"] == [0, 1, 2, 4, 8, 16]


def test_mlae_tie_resolves_to_smaller_angle():
    # a single k=1 measurement cannot tell theta from pi/2 - theta... actually
    # sin(3t)^2 aliases t and (pi - 3t)/3; with hits from t the grid must pick
    # the smaller preimage
    t_small = 0.3
    sched = MlaeSchedule((1,), (1,))
    hits = [math.sin(3 * t_small) ** 2]
    res = mlae_estimate(sched, hits)
    assert res.theta_hat < (math.pi - 3 * t_small) / 3 + 1e-6
    assert abs(res.theta_hat - t_small) < 1e-6


def test_mlae_input_validation():
    sched = default_schedule(1, 10)
    with pytest.raises(ValueError):
        mlae_estimate(sched, [1, 2])  # wrong length
    with pytest.raises(ValueError):
        mlae_estimate(sched, [11, 0, 0])  # hits > shots
    with pytest.raises(ValueError):
        mlae_estimate(sched, [-1, 0, 0])


def test_log_likelihood_vectorized_and_finite():
    sched = default_schedule(2, 100)
    hits = [50, 30, 70, 10]
    th = np.linspace(1e-6, math.pi / 2 - 1e-6, 50)
    ll = log_likelihood(th, sched, hits)
    assert ll.shape == (50,)
    assert np.all(np.isfinite(ll))
    # extreme hits at the boundary still avoid -inf via the clip floor
    ll0 = log_likelihood(np.array([1e-12]), sched, [100, 100, 100, 100])
    assert np.isfinite(ll0[0])


def test_optimized_grover_power_equivalent():
    op = load_function([0.2, 0.9])
    for k in (1, 2, 3):
        plain = simulate(grover_power(op, k, optimized=False))
        fast = simulate(grover_power(op, k, optimized=True))
        assert abs(abs(np.vdot(plain.amplitudes, fast.amplitudes)) - 1) < 1e-10


def test_optimized_falls_back_without_normal_form():
    from qaekit.state_prep import FlaggedOperator

    c = Circuit(2, (h(0), h(1)))
    op = FlaggedOperator(c, flags(1), "test", normal_form=None)
    plain = grover_power(op, 2, optimized=False)
    fb = grover_power(op, 2, optimized=True)
    assert fb == plain


@given(st.floats(min_value=0.02, max_value=0.95), st.integers(min_value=0, max_value=3))
@settings(max_examples=20, deadline=None)
def test_amplification_law_property(a, k):
    op = load_function([a])
    theta = math.asin(math.sqrt(a))
    got = good_probability(simulate(grover_power(op, k)), op.flags)
    assert abs(got - math.sin((2 * k + 1) * theta) ** 2) < 1e-9

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from qutrit_ybe.circuit import GateInstance, Circuit, circuit_unitary
from qutrit_ybe.optimizer import (
    OptimizerConfig,
    central_gradient,
    infidelity,
    lower_bound,
    minimize,
    multi_step_infidelity,
)
from qutrit_ybe.trotter import optimize_reflection, reflection_cost, step_angle

# Frozen from a dense 1e-3 grid over [0, 2pi)^2 of the T3 single-block cost,
# evaluated through the bilinear spectral form tr(W_L^dag P0_j P1_k) (no optimiser
# involved). The grid is taken at +|theta|; the cost is invariant under
# (theta, params) -> (-theta, -params) because every gate matrix is symmetric.
T3_GRID_MIN_J055 = 1.3306930812806428e-07
T3_GRID_ARGMIN_J055 = (0.014, 0.014)


def rand_unitary(seed, d=27):
    return unitary_group.rvs(d, random_state=seed)


def test_identical_and_phase():
    w = rand_unitary(1)
    assert infidelity(w, w) < 1e-14
    assert infidelity(w, np.exp(0.77j) * w) < 1e-14


def test_ux_pi_trace_oracle():
    # tr = 3 * (5 - 4) = 3, so C = 1 - 9 / 729 = 80 / 81
    ux = circuit_unitary(Circuit(3, [GateInstance("x", 0, math.pi)]))
    assert infidelity(np.eye(27), ux) == pytest.approx(80 / 81, abs=1e-14)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        infidelity(np.eye(27), np.eye(9))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_symmetry_and_common_unitary_invariance(seed):
    a, b, v = rand_unitary(seed), rand_unitary(seed + 1), rand_unitary(seed + 2)
    c = infidelity(a, b)
    assert 0 <= c <= 1
    assert abs(c - infidelity(b, a)) < 1e-14
    assert abs(infidelity(v @ a, v @ b) - c) < 1e-12
    assert abs(infidelity(a @ v, b @ v) - c) < 1e-12


def test_multi_step_definition():
    a, b = rand_unitary(3), rand_unitary(4)
    assert multi_step_infidelity(a, a, 4) < 1e-13
    assert multi_step_infidelity(a, b, 1) == infidelity(a, b)
    with pytest.raises(ValueError):
        multi_step_infidelity(a, b, 0)


def test_lower_bound_values():
    assert lower_bound(0.0, 5) == 0.0
    assert lower_bound(1.0, 3) == 1.0
    assert lower_bound(0.1, 2) == pytest.approx(0.19, abs=1e-15)
    with pytest.raises(ValueError):
        lower_bound(1.5, 2)


def _small_unitary(rng, radius, d=27):
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (h + h.conj().T) / 2
    h *= radius / np.abs(np.linalg.eigvalsh(h)).max()
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * e)) @ v.conj().T


def near_identity_pair(rng):
    """W_L within spectral radius 0.3 of I, W_R within 0.1 of W_L."""
    w_l = _small_unitary(rng, 0.3)
    return w_l, _small_unitary(rng, 0.1) @ w_l


@pytest.mark.parametrize("n_b", [2, 3, 4, 5])
def test_multi_step_lower_bound_near_identity(n_b):
    rng = np.random.default_rng(100 + n_b)
    for _ in range(100):
        w_l, w_r = near_identity_pair(rng)
        c1 = infidelity(w_l, w_r)
        assert multi_step_infidelity(w_l, w_r, n_b) >= lower_bound(c1, n_b) - 1e-10


def test_lower_bound_is_not_universal():
    # With a Haar-random W_L the powers decorrelate the error and the bound can fail;
    # seed frozen to a known counterexample.
    rng = np.random.default_rng(0)
    w_l = unitary_group.rvs(27, random_state=rng)
    worst = 1.0
    for _ in range(50):
        w_r = _small_unitary(rng, 0.1) @ w_l
        c1 = infidelity(w_l, w_r)
        worst = min(worst, multi_step_infidelity(w_l, w_r, 2) - lower_bound(c1, 2))
    assert worst < 0


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        OptimizerConfig(gradient_step=0)
    with pytest.raises(ValueError):
        OptimizerConfig.from_dict({"bogus": 1})
    assert OptimizerConfig.from_dict({"restarts": 3}).restarts == 3


def test_central_gradient_quadratic():
    g = central_gradient(lambda x: float(x @ x), np.array([1.0, -2.0]), 1e-6)
    assert np.abs(g - [2.0, -4.0]).max() < 1e-8


def test_minimize_quadratic():
    target = np.array([0.3, -1.2, 2.0])
    res = minimize(lambda x: float(np.sum((x - target) ** 2)), target + 1, OptimizerConfig(restarts=2))
    assert np.abs(res.best_params - target).max() < 1e-8
    assert res.best_infidelity == min(res.restart_infidelities)
    assert len(res.restart_infidelities) == 2


def test_minimize_rejects_non_finite_start():
    with pytest.raises(ValueError):
        minimize(lambda x: float("nan"), np.zeros(2))
    with pytest.raises(ValueError):
        minimize(lambda x: 0.0, np.array([np.inf]))


def test_minimize_deterministic():
    cost = reflection_cost("T1", 0.05, 2)
    cfg = OptimizerConfig(restarts=3, rng_seed=9)
    a = minimize(cost, np.full(4, 0.05), cfg)
    b = minimize(cost, np.full(4, 0.05), cfg)
    assert np.array_equal(a.best_params, b.best_params)
    assert a.restart_infidelities == b.restart_infidelities


def test_reference_identity_at_theta_04():
    res = optimize_reflection("TREF", 0.4, 1, OptimizerConfig(restarts=1))
    assert res.best_infidelity <= 1e-7


def test_t3_matches_grid_search_oracle():
    theta = step_angle(0.55, 5.0, 200)
    init = np.random.default_rng(4).uniform(-0.5, 0.5, 2)
    res = minimize(reflection_cost("T3", theta, 1), init, OptimizerConfig(restarts=4, rng_seed=1))
    assert abs(res.best_infidelity - T3_GRID_MIN_J055) < 1e-6
    # the continuous optimum can only sit below the grid optimum
    assert res.best_infidelity <= T3_GRID_MIN_J055
    assert np.abs(np.abs(res.best_params) - T3_GRID_ARGMIN_J055).max() < 1e-3

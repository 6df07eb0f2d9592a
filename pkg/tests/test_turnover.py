import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qutrit_ybe.circuit import Circuit, GateInstance, circuit_unitary
from qutrit_ybe.gates import embed, gate_matrix
from qutrit_ybe.spin_algebra import AXES, AxisWeights
from qutrit_ybe.turnover import (
    ALL_FULL_WEIGHTS,
    ALL_PAIR_WEIGHTS,
    TurnoverError,
    TurnoverInstance,
    active_sites_per_block,
    conjugated_family_residual,
    conjugated_gate_family,
    permute,
    qubit_restriction,
    qubit_subspace_blocks,
    rewrite_turnover,
    simple_identity_suite,
    split_blocks,
    subspace_suite,
    turnover_residual,
    turnover_suite,
)

angle = st.floats(0, 2 * np.pi, allow_nan=False)


def test_zero_angles_exact():
    assert turnover_residual(TurnoverInstance("x", 0, 0, 0, 0)) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(AXES), angle, angle, angle, angle)
def test_single_axis_turnover(axis, a, b, c, d):
    assert turnover_residual(TurnoverInstance(axis, a, b, c, d)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(ALL_PAIR_WEIGHTS + ALL_FULL_WEIGHTS), angle, angle, angle, angle)
def test_weighted_turnover_both_routes(w, a, b, c, d):
    assert turnover_residual(TurnoverInstance(w, a, b, c, d)) < 1e-12
    assert conjugated_family_residual(w, a, b, c, d) < 1e-12


def test_family_counts():
    # G and -G give the same G (x) G, so sign classes are counted once
    assert len(ALL_PAIR_WEIGHTS) == 6
    assert len(ALL_FULL_WEIGHTS) == 4


@pytest.mark.parametrize("w", ALL_PAIR_WEIGHTS + ALL_FULL_WEIGHTS, ids=lambda w: w.label())
def test_conjugated_family_matches_direct_exponential(w):
    for t in (0.3, -1.1, 2.9):
        assert np.linalg.norm(conjugated_gate_family(w)(t) - gate_matrix(w, t)) < 1e-12


def test_negative_control_exceeds_threshold():
    rng = np.random.default_rng(5)
    for a, b, c, d in rng.uniform(0, 2 * np.pi, (20, 4)):
        assert turnover_residual(TurnoverInstance("y", a, b, c, d, epsilon_offset=0.1)) > 1e-3


def test_suite_is_exact_and_control_fails():
    good = turnover_suite(samples=10, seed=3)
    assert max(good.values()) < 1e-12
    bad = turnover_suite(samples=10, seed=3, epsilon_offset=0.1)
    assert min(bad.values()) > 1e-3


@pytest.mark.parametrize("axis,alpha", [("x", 0.0), ("y", 0.7), ("z", np.pi / 3)])
def test_simple_identity_chains(axis, alpha):
    assert simple_identity_suite(axis, alpha) < 1e-12


def test_block_sizes_and_order():
    perm, sizes = qubit_subspace_blocks(3, "x")
    assert sizes == [1, 2, 2, 4, 2, 4, 4, 8]
    assert sorted(perm.tolist()) == list(range(27))
    # |000> first, |abc> block last; levels {1,2} are the active ones for x
    assert perm[0] == 0
    assert set(perm[-8:].tolist()) == {9 * a + 3 * b + c for a in (1, 2) for b in (1, 2) for c in (1, 2)}


def test_permutation_preserves_spectrum():
    perm, _ = qubit_subspace_blocks()
    u = embed(gate_matrix(AxisWeights.axis("x"), 0.4), 0, 3) @ embed(gate_matrix(AxisWeights.axis("x"), 1.3), 1, 3)
    phases = lambda m: np.sort(np.round(np.angle(np.linalg.eigvals(m)), 9))
    assert np.abs(phases(u) - phases(permute(u, perm))).max() < 1e-12


def test_abc_block_is_qubit_turnover():
    a, b, c = 0.4, 1.7, -0.6
    ux = lambda t: gate_matrix(AxisWeights.axis("x"), t)
    lhs = embed(ux(a), 0, 3) @ embed(ux(b), 1, 3) @ embed(ux(c), 0, 3)
    perm, sizes = qubit_subspace_blocks()
    blocks, off = split_blocks(permute(lhs, perm), sizes)
    assert off < 1e-12
    y = np.array([[0, -1j], [1j, 0]])
    yy01 = np.kron(np.kron(y, y), np.eye(2))
    yy12 = np.kron(np.eye(2), np.kron(y, y))
    ex = lambda t, g: np.cos(t) * np.eye(8) - 1j * np.sin(t) * g
    assert np.linalg.norm(blocks[-1] - ex(a, yy01) @ ex(b, yy12) @ ex(c, yy01)) < 1e-12


def test_restriction_is_identity_when_a_site_is_idle():
    assert np.array_equal(qubit_restriction(0, 0.9, (0, 2)), np.eye(4))
    assert active_sites_per_block()[0] == () and active_sites_per_block()[-1] == (0, 1, 2)


def test_subspace_suite_exact():
    assert max(subspace_suite(samples=5, seed=2).values()) < 1e-12


def _triple(gen, sites, angles):
    return Circuit(3, [GateInstance(gen, s, t) for s, t in zip(sites, angles)])


def test_rewrite_equal_angles():
    th = 0.37
    c = _triple("x", (0, 1, 0), (th, th, th))
    r = rewrite_turnover(c, 0)
    assert [(g.site, g.angle) for g in r.gates] == [(1, th / 2), (0, 2 * th), (1, th / 2)]
    assert np.linalg.norm(circuit_unitary(r) - circuit_unitary(c)) < 1e-12


def test_rewrite_zero_angles():
    r = rewrite_turnover(_triple("z", (0, 1, 0), (0, 0, 0)), 0)
    assert all(g.angle == 0 for g in r.gates)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["x", "y", "z"]), angle, angle, angle)
def test_rewrite_round_trip(gen, a, b, c):
    orig = _triple(gen, (0, 1, 0), (a, b, c))
    there = rewrite_turnover(orig, 0, "L->R")
    back = rewrite_turnover(there, 0, "R->L")
    assert np.linalg.norm(circuit_unitary(there) - circuit_unitary(orig)) < 1e-12
    assert np.linalg.norm(circuit_unitary(back) - circuit_unitary(orig)) < 1e-12


def test_rewrite_errors_name_gate():
    with pytest.raises(TurnoverError) as e:
        rewrite_turnover(Circuit(3, [GateInstance("x", 0, 1), GateInstance("y", 1, 1), GateInstance("x", 0, 1)]), 0)
    assert e.value.gate_index == 1
    with pytest.raises(TurnoverError) as e:
        rewrite_turnover(_triple("xy", (0, 1, 0), (1, 1, 1)), 0)
    assert e.value.gate_index == 0
    with pytest.raises(TurnoverError):
        rewrite_turnover(_triple("x", (0, 1, 1), (1, 1, 1)), 0)
    with pytest.raises(TurnoverError):
        rewrite_turnover(_triple("x", (0, 1, 0), (1, 1, 1)), 1)
    with pytest.raises(ValueError):
        rewrite_turnover(_triple("x", (0, 1, 0), (1, 1, 1)), 0, "up")

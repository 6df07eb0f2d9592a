import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from qutrit_ybe.gates import (
    closed_form_single_axis,
    embed,
    embed_two_site_operator,
    gate_matrix,
    pair_generator,
    xy_generator,
    xy_pair_gate,
)
from qutrit_ybe.spin_algebra import AXES, AxisWeights, conjugation_matrix, spin_operator

angles = st.floats(-4 * np.pi, 4 * np.pi, allow_nan=False)
weights = st.tuples(*[st.sampled_from([-1, 0, 1])] * 3).filter(any).map(lambda w: AxisWeights(*w))


def expm_oracle(h, angle):
    # independent route: scipy's Pade scaling-and-squaring
    return scipy.linalg.expm(-1j * angle * h)


def test_zero_angle_identity():
    assert np.abs(gate_matrix(AxisWeights.axis("x"), 0.0) - np.eye(9)).max() == 0
    assert np.abs(xy_pair_gate(0.0) - np.eye(9)).max() < 1e-14


def test_ux_at_pi_is_diagonal_sign_pattern():
    expected = np.diag([1, 1, 1, 1, -1, -1, 1, -1, -1]).astype(complex)
    assert np.abs(gate_matrix(AxisWeights.axis("x"), np.pi) - expected).max() < 1e-15


def test_closed_form_blocks_for_x():
    a = 0.83
    u = closed_form_single_axis("x", a)
    s = spin_operator("x")
    assert np.allclose(u[:3, :3], np.eye(3), atol=0)
    assert np.abs(u[3:6, 3:6] - (np.eye(3) - 2 * np.sin(a / 2) ** 2 * s @ s)).max() < 1e-15
    assert np.abs(u[3:6, 6:9] - np.sin(a) * s).max() < 1e-15
    assert np.abs(u[6:9, 3:6] + np.sin(a) * s).max() < 1e-15


@pytest.mark.parametrize("axis,perm", [("y", "Py"), ("z", "Pz")])
def test_closed_form_permutation_relations(axis, perm):
    p = conjugation_matrix(perm)
    pp = np.kron(p, p)
    for a in np.linspace(0, 2 * np.pi, 7):
        assert np.abs(closed_form_single_axis(axis, a) - pp @ closed_form_single_axis("x", a) @ pp.conj().T).max() < 1e-12


@pytest.mark.parametrize("axis", AXES)
def test_closed_form_matches_expm_on_random_angles(axis):
    rng = np.random.default_rng(11)
    h = pair_generator(AxisWeights.axis(axis))
    for a in rng.uniform(0, 2 * np.pi, 100):
        assert np.linalg.norm(closed_form_single_axis(axis, a) - expm_oracle(h, a)) < 1e-12


def test_xy_gate_against_expm():
    for a in (0.1, -0.7, 2.5):
        assert np.linalg.norm(xy_pair_gate(a) - expm_oracle(xy_generator(), a)) < 1e-12


def test_xy_generators_do_not_commute():
    sx, sy = spin_operator("x"), spin_operator("y")
    xx, yy = np.kron(sx, sx), np.kron(sy, sy)
    assert np.linalg.norm(xx @ yy - yy @ xx) == pytest.approx(np.sqrt(2), abs=1e-14)
    ux, uy = gate_matrix(AxisWeights.axis("x"), 0.7), gate_matrix(AxisWeights.axis("y"), 0.7)
    assert np.linalg.norm(xy_pair_gate(0.7) - ux @ uy) > 0.1


def test_pair_weight_gate_is_not_xy_gate():
    assert np.linalg.norm(gate_matrix(AxisWeights(1, 1, 0), 0.4) - xy_pair_gate(0.4)) > 0.1


def test_xy_gate_is_not_two_pi_periodic():
    # spectrum contains +-sqrt(2)
    assert np.linalg.norm(xy_pair_gate(0.3 + 2 * np.pi) - xy_pair_gate(0.3)) > 0.1


@settings(max_examples=60, deadline=None)
@given(weights, angles)
def test_gate_matches_expm_unitary_and_periodic(w, a):
    u = gate_matrix(w, a)
    assert np.linalg.norm(u - expm_oracle(pair_generator(w), a)) < 1e-11
    assert np.linalg.norm(u @ u.conj().T - np.eye(9)) < 1e-12
    assert np.linalg.norm(gate_matrix(w, a + 2 * np.pi) - u) < 1e-12


def test_embed_identity_and_kron():
    assert np.array_equal(embed(np.eye(9), 0, 3), np.eye(27))
    u = gate_matrix(AxisWeights.axis("x"), 0.4)
    assert np.array_equal(embed(u, 0, 3), np.kron(u, np.eye(3)))
    assert np.array_equal(embed(u, 1, 3), np.kron(np.eye(3), u))


def test_same_axis_neighbours_commute():
    u = gate_matrix(AxisWeights.axis("x"), 0.9)
    a, b = embed(u, 0, 3), embed(u, 1, 3)
    assert np.linalg.norm(a @ b - b @ a) < 1e-13


@pytest.mark.parametrize("site,n", [(-1, 3), (2, 3), (0, 7), (0, 1)])
def test_embed_rejects_bad_register(site, n):
    with pytest.raises(ValueError):
        embed(np.eye(9), site, n)


def test_wrap_bond_embedding_by_index_arithmetic():
    # (2, 0) on three sites: permuting the register (0,1,2) -> (2,0,1) brings it to (0,1)
    h = xy_generator()
    op = embed_two_site_operator(h, 2, 0, 3)
    perm = np.array([9 * q2 + 3 * q0 + q1 for q0 in range(3) for q1 in range(3) for q2 in range(3)])
    ref = np.kron(h, np.eye(3))
    assert np.abs(op - ref[np.ix_(perm, perm)]).max() < 1e-15
    assert np.abs(embed_two_site_operator(h, 0, 1, 3) - ref).max() == 0

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollctl.liegroup import (
    elem_rot,
    exp_so3,
    hat,
    inverse_dexp,
    is_rotation,
    log_so3,
    project_so3,
    renormalize_rotation,
    vee,
)

RNG = np.random.default_rng(1)


def random_rotvec(max_angle=3.0):
    v = RNG.normal(size=3)
    return v / np.linalg.norm(v) * RNG.uniform(0, max_angle)


def test_hat_basis():
    assert np.array_equal(
        hat(np.array([1.0, 0, 0])), np.array([[0, 0, 0], [0, 0, -1.0], [0, 1.0, 0]])
    )
    assert np.array_equal(hat(np.zeros(3)), np.zeros((3, 3)))


def test_hat_cross_product_oracle():
    for _ in range(100):
        v, w = RNG.normal(size=3), RNG.normal(size=3)
        assert np.abs(hat(v) @ w - np.cross(v, w)).max() < 1e-14


def test_hat_antisymmetric_pairing():
    for _ in range(20):
        u, v = RNG.normal(size=3), RNG.normal(size=3)
        np.testing.assert_allclose(hat(u) @ v, -(hat(v) @ u), atol=1e-14)


def test_vee_inverse_of_hat():
    assert np.array_equal(vee(hat(np.array([3.0, -2.0, 7.0]))), [3.0, -2.0, 7.0])
    assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))


def test_vee_closed_form_on_antisymmetrized():
    for _ in range(50):
        A = RNG.normal(size=(3, 3))
        S = 0.5 * (A - A.T)
        expect = 0.5 * np.array(
            [A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]]
        )
        np.testing.assert_allclose(vee(S), expect, atol=1e-15)


def test_vee_rejects_non_skew():
    with pytest.raises(ValueError, match="not antisymmetric"):
        vee(np.eye(3))


def test_exp_quarter_turn():
    R = exp_so3(np.array([0.0, 0.0, np.pi / 2]))
    np.testing.assert_allclose(R @ [1.0, 0, 0], [0.0, 1.0, 0.0], atol=1e-15)
    assert np.array_equal(exp_so3(np.zeros(3)), np.eye(3))


def test_exp_matches_truncated_series():
    for _ in range(30):
        v = random_rotvec(max_angle=1.0)
        H = hat(v)
        S, term = np.eye(3), np.eye(3)
        for k in range(1, 20):
            term = term @ H / k
            S = S + term
        assert np.abs(exp_so3(v) - S).max() < 1e-10


def test_exp_invariants_and_periodicity():
    for _ in range(30):
        v = random_rotvec()
        assert is_rotation(exp_so3(v), tol=1e-12)
    n = np.array([1.0, 2.0, 2.0]) / 3.0
    np.testing.assert_allclose(
        exp_so3(0.7 * n), exp_so3((0.7 + 2 * np.pi) * n), atol=1e-13
    )


@given(
    st.lists(st.floats(-1e-9, 1e-9), min_size=3, max_size=3),
)
@settings(max_examples=50, deadline=None)
def test_exp_tiny_angles_stay_rotations(v):
    assert is_rotation(exp_so3(np.array(v)), tol=1e-14)


def test_log_elementary():
    np.testing.assert_allclose(
        log_so3(elem_rot(1, np.pi / 9)), [np.pi / 9, 0, 0], atol=1e-14
    )
    assert np.array_equal(log_so3(np.eye(3)), np.zeros(3))


def test_log_exp_roundtrip():
    for _ in range(100):
        R = exp_so3(random_rotvec(max_angle=3.0))
        assert np.abs(exp_so3(log_so3(R)) - R).max() < 1e-9


def test_log_near_cut_locus_raises():
    with pytest.raises(ValueError, match="cut locus"):
        log_so3(exp_so3(np.array([np.pi - 1e-9, 0.0, 0.0])))


def test_project_idempotent_and_scaling():
    R = exp_so3(random_rotvec())
    np.testing.assert_allclose(project_so3(R), R, atol=1e-14)
    np.testing.assert_allclose(project_so3(1.01 * np.eye(3)), np.eye(3), atol=1e-14)


def test_project_perturbation_bound():
    for _ in range(50):
        R = exp_so3(random_rotvec())
        E = RNG.normal(size=(3, 3))
        E *= 1e-4 / np.linalg.norm(E)
        assert np.abs(project_so3(R + E) - R).max() < 2e-4


def test_project_rejects_non_orientable():
    with pytest.raises(ValueError, match="non-orientable"):
        project_so3(-np.eye(3))
    with pytest.raises(ValueError, match="non-orientable"):
        project_so3(np.diag([1.0, 1.0, 0.0]))


def test_renormalize_agrees_with_projection_near_group():
    for _ in range(50):
        R = exp_so3(random_rotvec())
        E = RNG.normal(size=(3, 3))
        E *= 1e-8 / np.linalg.norm(E)
        A = R + E
        assert np.abs(renormalize_rotation(A) - project_so3(A)).max() < 1e-14


def test_elem_rot_column_and_identity():
    c, s = np.cos(np.pi / 3), np.sin(np.pi / 3)
    np.testing.assert_allclose(elem_rot(3, np.pi / 3) @ [1.0, 0, 0], [c, s, 0], atol=1e-15)
    assert np.array_equal(elem_rot(1, 0.0), np.eye(3))


def test_elem_rot_matches_exp():
    for _ in range(50):
        axis = int(RNG.integers(1, 4))
        angle = RNG.uniform(-3, 3)
        v = np.zeros(3)
        v[axis - 1] = angle
        np.testing.assert_allclose(elem_rot(axis, angle), exp_so3(v), atol=1e-15)
    with pytest.raises(ValueError):
        elem_rot(4, 0.1)


def test_trace_pairing_identity():
    for _ in range(50):
        x, y = RNG.normal(size=3), RNG.normal(size=3)
        assert abs(np.trace(hat(x) @ hat(y)) + 2 * x @ y) < 1e-12


def test_inverse_dexp_matches_finite_difference():
    # d/dt exp(u + t delta) at t=0 has body velocity J(u) delta; inverse_dexp
    # must invert that map
    for _ in range(20):
        u = random_rotvec(max_angle=2.0)
        delta = RNG.normal(size=3)
        h = 1e-6
        Rp = exp_so3(u + h * delta)
        Rm = exp_so3(u - h * delta)
        W = exp_so3(u).T @ (Rp - Rm) / (2 * h)
        w = vee(0.5 * (W - W.T), tol=1e-3)
        np.testing.assert_allclose(inverse_dexp(u, w), delta, atol=1e-6)

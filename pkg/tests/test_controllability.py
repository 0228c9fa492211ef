import numpy as np
import pytest

from rollctl.controllability import (
    bracket_top_block_closed_form,
    closed_loop_field,
    fiber_field,
    fiber_fields,
    fiber_rank,
    fiber_rank_report,
    input_field,
    input_fields,
    lie_bracket_numeric,
    local_rank,
    local_rank_report,
    mechanical_connection,
)
from rollctl.liegroup import exp_so3
from rollctl.model import E3, RobotParams, RobotState, body_momentum

RNG = np.random.default_rng(5)
P = RobotParams.default()


def random_rot(max_angle=3.0):
    v = RNG.normal(size=3)
    return exp_so3(v / np.linalg.norm(v) * RNG.uniform(0, max_angle))


def random_state():
    return RobotState.from_attitude(
        random_rot(), omega=RNG.normal(size=3), theta_dot=RNG.normal(size=3)
    )


def random_unit():
    v = RNG.normal(size=3)
    return v / np.linalg.norm(v)


class TestMechanicalConnection:
    def test_vertical_diagonal(self):
        A = mechanical_connection(P, E3)
        d_perp = P.J_a / (P.i_s + P.J_a + P.m_T * P.r**2)
        d_par = P.J_a / (P.i_s + P.J_a)
        np.testing.assert_allclose(np.diag(A), [d_perp, d_perp, d_par], rtol=1e-12)
        np.testing.assert_allclose(np.diag(A), [6.177e-4, 6.177e-4, 4.373e-3], rtol=1e-3)

    def test_zero_momentum_identity(self):
        for _ in range(20):
            g = random_unit()
            thd = RNG.normal(size=3)
            omega = -mechanical_connection(P, g) @ thd
            np.testing.assert_allclose(
                body_momentum(P, omega, thd, g), np.zeros(3), atol=1e-15
            )

    def test_entry_bound(self):
        bound = P.J_a / (P.i_s + P.J_a)
        for _ in range(50):
            A = mechanical_connection(P, random_unit())
            assert np.abs(A).max() <= bound * (1 + 1e-12)
        assert bound <= 4.4e-3


class TestInputFields:
    def test_vertical_value(self):
        s = RobotState.from_attitude(np.eye(3))
        g3 = input_fields(P, s)[2]
        np.testing.assert_allclose(g3[:3], np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(g3[3:], [0, 0, -1.0 / 0.0153], rtol=1e-12)

    def test_linearly_independent(self):
        s = random_state()
        M = np.array([v[3:] for v in input_fields(P, s)])
        assert np.linalg.matrix_rank(M) == 3

    def test_flow_of_input_field_is_a_rate_shift(self):
        # the flow moves only the velocity slot, matching d/dt(omega) = -M^{-1} e_i
        s = random_state()
        f = input_field(P, s, 1)
        z = np.zeros(6)
        val = f(z)
        assert np.array_equal(val[:3], np.zeros(3))
        np.testing.assert_allclose(
            val[3:], bracket_top_block_closed_form(P, s, 1), atol=1e-15
        )


class TestFiberFields:
    def test_vertical_spin_moves_no_contact_point(self):
        vals = fiber_fields(P, E3)
        np.testing.assert_allclose(vals[2][6:8], np.zeros(2), atol=1e-15)

    def test_shape_block_is_basis(self):
        vals = fiber_fields(P, random_unit())
        for i, v in enumerate(vals):
            expect = np.zeros(3)
            expect[i] = 1.0
            np.testing.assert_allclose(v[3:6], expect, atol=1e-15)

    def test_plane_block_horizontal(self):
        # the inertial contact velocity has no vertical component by
        # construction; check the full 3-vector before projection
        for _ in range(20):
            g = random_unit()
            R = random_rot()
            if abs((R.T @ E3 - g).max()) > 0:  # use consistent pair
                g = R.T @ E3
            A = mechanical_connection(P, g)
            for i in range(3):
                v3 = R @ (P.r * np.cross(-A[:, i], g))
                assert abs(v3[2]) < 1e-15


class TestBracket:
    def test_bracket_with_self_vanishes(self):
        s = random_state()
        f = closed_loop_field(P, s)
        b = lie_bracket_numeric(f, f, 6)
        scale = 1.0 + np.abs(f(np.zeros(6))).max()
        assert np.abs(b).max() < 1e-7 * scale

    def test_constant_fields_commute(self):
        c1, c2 = RNG.normal(size=6), RNG.normal(size=6)
        b = lie_bracket_numeric(lambda z: c1, lambda z: c2, 6)
        assert np.abs(b).max() < 1e-9

    def test_antisymmetry(self):
        s = random_state()
        F = closed_loop_field(P, s)
        g1 = input_field(P, s, 0)
        b12 = lie_bracket_numeric(g1, F, 6, h=1e-4)
        b21 = lie_bracket_numeric(F, g1, 6, h=1e-4)
        assert np.abs(b12 + b21).max() < 10 * 1e-4**2

    def test_closed_form_top_block(self):
        for _ in range(5):
            s = random_state()
            F = closed_loop_field(P, s, R_d=random_rot())
            for i in range(3):
                b = lie_bracket_numeric(input_field(P, s, i), F, 6)
                np.testing.assert_allclose(
                    b[:3], bracket_top_block_closed_form(P, s, i), atol=1e-5
                )

    def test_step_underflow_rejected(self):
        s = random_state()
        with pytest.raises(ValueError, match="underflow"):
            lie_bracket_numeric(input_field(P, s, 0), closed_loop_field(P, s), 6, h=1e-9)


class TestLocalRank:
    def test_random_states_full_rank(self):
        for _ in range(20):
            assert local_rank(P, random_state()) == 6

    def test_degenerate_actuation_drops_rank(self):
        s = random_state()
        rank_deficient = np.outer(np.ones(3), np.ones(3))
        assert local_rank(P, s, actuation=rank_deficient) < 6

    def test_rotation_equivariance(self):
        s = random_state()
        r0 = local_rank_report(P, s)
        Q = random_rot()
        s2 = RobotState.from_attitude(
            Q @ s.R, omega=s.omega.copy(), theta_dot=s.theta_dot.copy()
        )
        r2 = local_rank_report(P, s2)
        assert r0.rank == r2.rank == 6

    def test_step_insensitivity(self):
        s = random_state()
        assert local_rank(P, s, h=1e-3) == local_rank(P, s, h=1e-4) == 6


class TestFiberRank:
    def test_vertical(self):
        assert fiber_rank(P, E3) == 5

    def test_random_sweep(self):
        for _ in range(20):
            assert fiber_rank(P, random_unit()) == 5

    def test_pair_selection_detail_at_vertical(self):
        rep = fiber_rank_report(P, E3)
        # at the symmetric point the (1,2)+(1,3) pair alone is degenerate
        assert rep.pair_ranks["(1,2)+(1,3)"] == 4
        assert max(rep.pair_ranks.values()) == 5
        assert rep.rank == 5

    def test_pair_selection_generic(self):
        rep = fiber_rank_report(P, random_unit())
        assert all(r == 5 for r in rep.pair_ranks.values())

    def test_first_three_fields_block_ranks(self):
        g = random_unit()
        vals = fiber_fields(P, g)
        so3_rank = np.linalg.matrix_rank(np.array([v[:3] for v in vals]))
        plane_rank = np.linalg.matrix_rank(np.array([v[6:8] for v in vals]))
        assert so3_rank == 3
        assert plane_rank <= 2

    def test_step_insensitivity(self):
        g = random_unit()
        assert fiber_rank(P, g, h=1e-3) == fiber_rank(P, g, h=1e-4) == 5

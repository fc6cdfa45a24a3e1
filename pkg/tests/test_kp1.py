"""Tests for the KP-I lump solver and its integral identities."""

import numpy as np
import pytest

from nlstw import (
    Grid,
    ScalarField,
    default_seed,
    identity_residuals,
    integrate,
    kp_action,
    kp_residual,
    solve_kp_ground_state,
)
from nlstw.errors import NonZeroXMean


@pytest.fixture(scope="module")
def lump():
    return solve_kp_ground_state(6.0, Grid(40.0, 40.0, 256, 256))


class TestGroundState:
    def test_action_is_positive(self, lump):
        assert lump.action > 0.0

    def test_profile_is_negative_at_the_core(self, lump):
        assert np.min(lump.w.values) < -0.5
        # the cubic integral lowers the action
        assert integrate(ScalarField(lump.w.grid, lump.w.values**3)) < 0.0

    def test_equation_residual_small(self, lump):
        assert lump.residual < 1e-9

    def test_integral_identities(self, lump):
        assert lump.r1 < 1e-10
        assert lump.r2 < 1e-4
        assert lump.r3 < 1e-10

    def test_zero_line_means(self, lump):
        means = np.mean(lump.w.values, axis=0)
        assert np.max(np.abs(means)) < 1e-10 * np.max(np.abs(lump.w.values))

    def test_gamma_covariance(self, lump):
        """Doubling the quadratic coupling exactly halves the profile."""
        other = solve_kp_ground_state(
            12.0, lump.w.grid, seed=ScalarField(lump.w.grid, lump.w.values / 2.0)
        )
        assert np.allclose(other.w.values, lump.w.values / 2.0, atol=1e-10)

    def test_rejects_zero_gamma(self):
        with pytest.raises(ValueError):
            solve_kp_ground_state(0.0, Grid(20.0, 20.0, 64, 64))


class TestResidualAndAction:
    def test_residual_vanishes_only_on_solutions(self, lump):
        g = lump.w.grid
        res_sol = kp_residual(lump.w, 6.0)
        scale = np.sqrt(integrate(ScalarField(g, lump.w.values**2)))
        assert np.sqrt(integrate(ScalarField(g, res_sol.values**2))) < 1e-8 * scale
        perturbed = ScalarField(g, 1.1 * lump.w.values)
        res_bad = kp_residual(perturbed, 6.0)
        assert np.sqrt(integrate(ScalarField(g, res_bad.values**2))) > 1e-3 * scale

    def test_residual_rejects_nonzero_line_means(self):
        g = Grid(20.0, 20.0, 64, 64)
        with pytest.raises(NonZeroXMean):
            kp_residual(ScalarField(g, np.ones((64, 64))), 6.0)

    def test_action_of_stationary_point_matches_identities(self, lump):
        a, b, c, d = lump.integrals
        S = a + c + d + 2.0 * b  # gamma/3 = 2 at gamma = 6
        assert kp_action(lump.w, 6.0) == pytest.approx(S, rel=1e-12)
        assert kp_action(lump.w, 6.0) == pytest.approx(lump.action, rel=1e-12)

    def test_action_rejects_non_derivative_input(self):
        g = Grid(20.0, 20.0, 64, 64)
        X1, X2 = g.meshgrid()
        f = ScalarField(g, np.cos(np.pi * X2 / g.L2))
        with pytest.raises(NonZeroXMean):
            kp_action(f, 6.0)


class TestBoundaryCorrections:
    def test_corrections_shrink_with_the_box(self):
        """The identity residuals stay small as the box grows while the
        raw boundary terms decay, showing they measure the finite box."""
        small = solve_kp_ground_state(6.0, Grid(30.0, 30.0, 192, 192))
        large = solve_kp_ground_state(6.0, Grid(60.0, 60.0, 384, 384))
        assert abs(large.e2) < abs(small.e2)
        assert abs(large.e3) < abs(small.e3)
        for state in (small, large):
            assert max(state.r1, state.r2, state.r3) < 1e-4

    def test_identity_residuals_reproducible(self, lump):
        S, integrals, e2, e3, r1, r2, r3 = identity_residuals(lump.w, 6.0)
        assert S == pytest.approx(lump.action, rel=1e-13)
        assert (r1, r2, r3) == (lump.r1, lump.r2, lump.r3)


class TestSeed:
    def test_default_seed_has_zero_line_means(self):
        g = Grid(20.0, 20.0, 64, 64)
        seed = default_seed(g)
        assert np.max(np.abs(np.mean(seed.values, axis=0))) < 1e-12

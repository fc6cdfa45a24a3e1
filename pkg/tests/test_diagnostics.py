"""Tests for the identity verifiers and curve shape checks."""

from types import SimpleNamespace

import numpy as np
import pytest

from nlstw import (
    ComplexField,
    Grid,
    Nonlinearity,
    coupling_g,
    curve_checks,
    madelung_identities,
    momentum,
    multiplier_relation,
    multiplier_symbol,
    pohozaev,
    pohozaev_transverse,
)
from nlstw.diagnostics import MULTIPLIER_TOL, QUADRATURE_TOL
from nlstw.physics import kinetic, potential_integral

SOUND_SPEED = np.sqrt(2.0)


class TestDilationIdentities:
    def test_pass_on_converged_wave(self, gp, small_wave):
        for rep in (
            pohozaev(small_wave.psi, gp, small_wave.speed),
            pohozaev_transverse(small_wave.psi, gp, small_wave.speed),
        ):
            assert rep.passed
            assert rep.rel_residual < 1e-4
            assert rep.tolerance == QUADRATURE_TOL

    def test_trivial_on_constant_field(self, gp):
        g = Grid(8.0, 8.0, 32, 32)
        psi = ComplexField(g, np.ones((32, 32), dtype=complex))
        rep = pohozaev(psi, gp, 0.5)
        assert rep.lhs == rep.rhs == 0.0
        assert rep.passed

    def test_dimension_generic_form_is_the_stated_formula(self, gp):
        g = Grid(8.0, 8.0, 32, 32)
        X1, X2 = g.meshgrid()
        psi = ComplexField(
            g, 1.0 + 0.2 * np.exp(1j * np.pi * X1 / g.L1) * np.cos(np.pi * X2 / g.L2)
        )
        c = 0.9
        rep = pohozaev(psi, gp, c, N=3)
        assert rep.name == "pohozaev-dim3"
        assert rep.lhs == pytest.approx(2 * c * momentum(psi))
        assert rep.rhs == pytest.approx(
            kinetic(psi) + 3 * potential_integral(psi, gp)
        )

    def test_rejects_low_dimension(self, gp, small_wave):
        with pytest.raises(ValueError):
            pohozaev(small_wave.psi, gp, small_wave.speed, N=1)


class TestMadelungIdentities:
    def test_pass_on_converged_wave(self, gp, small_wave):
        reps = madelung_identities(small_wave.psi, gp, small_wave.speed)
        assert [r.name for r in reps] == [
            "phase-scaling-balance",
            "modulus-variation-balance",
        ]
        for rep in reps:
            assert rep.passed, (rep.name, rep.rel_residual)

    def test_fail_at_the_wrong_speed(self, gp, small_wave):
        reps = madelung_identities(small_wave.psi, gp, 0.5 * small_wave.speed)
        assert not reps[0].passed


class TestCouplingAndSymbol:
    def test_coupling_closed_form_for_cubic(self, gp):
        s = np.linspace(-0.5, 0.5, 11)
        assert np.allclose(coupling_g(gp, s), -2.0 * s**2, atol=1e-14)

    def test_coupling_leading_coefficient_tracks_curvature(self, cq):
        # g(s) = (F''(1) - 2) s^2 + O(s^3)
        s = 1e-4
        lead = coupling_g(cq, s) / s**2
        assert lead == pytest.approx(cq.d2F_at_1 - 2.0, abs=1e-2)

    def test_symbol_values(self):
        assert multiplier_symbol(1.0, np.array(0.0), np.array(0.0)) == 0.0
        # |xi|^2 / (|xi|^4 + 2|xi|^2 - c^2 xi1^2) at xi = (1, 0), c = 1
        assert multiplier_symbol(1.0, np.array(1.0), np.array(0.0)) == pytest.approx(
            0.5
        )

    def test_symbol_positive_for_subsonic_speeds(self):
        xi1, xi2 = np.meshgrid(np.linspace(-3, 3, 31), np.linspace(-3, 3, 31))
        vals = multiplier_symbol(1.3, xi1, xi2)
        assert np.all(vals >= 0.0)
        assert np.all(np.isfinite(vals))


class TestMultiplierRelation:
    def test_passes_on_converged_wave(self, gp, small_wave):
        rep = multiplier_relation(small_wave.psi, gp, small_wave.speed)
        assert rep.passed
        assert rep.rel_residual < 1e-3
        assert rep.tolerance == MULTIPLIER_TOL
        assert rep.norm_eta > 0.0

    def test_fails_at_the_wrong_speed(self, gp, small_wave):
        rep = multiplier_relation(small_wave.psi, gp, 0.25 * small_wave.speed)
        assert rep.rel_residual > 10 * multiplier_relation(
            small_wave.psi, gp, small_wave.speed
        ).rel_residual


def fake_curve(family, q, v, converged=None):
    q = np.asarray(q, dtype=float)
    if converged is None:
        converged = np.ones(q.size, dtype=bool)
    return SimpleNamespace(
        abscissae=q,
        values=np.asarray(v, dtype=float),
        converged=np.asarray(converged),
        family=family,
    )


class TestCurveChecks:
    def test_well_shaped_momentum_curve_passes(self, gp):
        q = np.array([0.5, 1.0, 1.5, 2.0, 3.0])
        v = SOUND_SPEED * q - 0.01 * q**3
        reports = curve_checks(fake_curve("momentum", q, v), gp)
        names = {r.name for r in reports}
        assert names == {
            "concavity",
            "monotone-nondecreasing",
            "sonic-upper-bound",
            "slopes-within-sound-speed",
            "subadditivity",
        }
        assert all(r.passed for r in reports)

    def test_convex_curve_fails_concavity(self, gp):
        q = np.array([1.0, 2.0, 3.0, 4.0])
        v = 0.1 * q**2
        reports = {r.name: r for r in curve_checks(fake_curve("momentum", q, v), gp)}
        assert not reports["concavity"].passed

    def test_supersonic_curve_fails_bound(self, gp):
        q = np.array([1.0, 2.0, 3.0])
        v = 1.6 * q
        reports = {r.name: r for r in curve_checks(fake_curve("momentum", q, v), gp)}
        assert not reports["sonic-upper-bound"].passed
        assert not reports["slopes-within-sound-speed"].passed

    def test_kinetic_family_checks(self, gp):
        k = np.array([0.2, 0.4, 0.6, 0.8])
        v = -k / 2.0 - 0.05 * k**2
        reports = {r.name: r for r in curve_checks(fake_curve("kinetic", k, v), gp)}
        assert set(reports) == {
            "concavity",
            "monotone-nonincreasing",
            "sonic-upper-bound",
        }
        assert all(r.passed for r in reports.values())

    def test_unconverged_points_are_ignored(self, gp):
        q = np.array([0.5, 1.0, 1.5, 2.0])
        v = SOUND_SPEED * q - 0.01 * q**3
        v[2] = 100.0  # garbage at an unconverged point
        flags = np.array([True, True, False, True])
        reports = curve_checks(fake_curve("momentum", q, v, flags), gp)
        assert all(r.passed for r in reports)

    def test_needs_three_converged_points(self, gp):
        q = np.array([0.5, 1.0])
        with pytest.raises(ValueError):
            curve_checks(fake_curve("momentum", q, q), gp)

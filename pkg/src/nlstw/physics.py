"""Nonlinearities, the saturating cutoff, and the scalar functionals.

Everything here evaluates integrals of a complex order parameter psi on a
periodic grid: energy, Ginzburg-Landau energy, momentum, the kinetic /
potential split, the composite functionals E_c, I, B_c, P_c, and the
L2-gradients of E and Q used by the constrained flows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirection, ModulusTooSmall, NonzeroWinding
from .grid import ComplexField, ScalarField, derivative, integrate


# ---------------------------------------------------------------------------
# nonlinearity family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Nonlinearity:
    """Polynomial nonlinearity F(s) with the normalization F(1)=0, F'(1)=-1.

    ``coeffs[k]`` is the coefficient of s**k in F.  The potential
    V(s) = integral of F from s to 1 is kept in closed form (polynomial
    antiderivative), never by quadrature.
    """

    name: str
    coeffs: tuple = field(default=(1.0, -1.0))

    def __post_init__(self):
        c = tuple(float(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if abs(self.F(1.0)) > 1e-12:
            raise ValueError("nonlinearity must vanish at s=1")
        if abs(self.dF(1.0) + 1.0) > 1e-12:
            raise ValueError("nonlinearity must have slope -1 at s=1")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def gross_pitaevskii() -> "Nonlinearity":
        """F(s) = 1 - s."""
        return Nonlinearity("gp", (1.0, -1.0))

    @staticmethod
    def cubic_quintic(alpha5: float = 3.0) -> "Nonlinearity":
        """F(s) = -(alpha5-1) + (2*alpha5-1)s - alpha5*s**2, alpha5 > 1.

        The one-parameter family enforcing F(1)=0, F'(1)=-1; its potential
        dips below zero (V(0) < 0 for alpha5 > 3/2).
        """
        if alpha5 <= 1.0:
            raise ValueError("alpha5 must exceed 1")
        return Nonlinearity(
            "cubic_quintic", (-(alpha5 - 1.0), 2.0 * alpha5 - 1.0, -alpha5)
        )

    @staticmethod
    def polynomial(coeffs) -> "Nonlinearity":
        return Nonlinearity("poly", tuple(coeffs))

    # -- pointwise evaluations ----------------------------------------------

    def F(self, s):
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * s + c
        return out

    def dF(self, s):
        out = 0.0
        for k in range(len(self.coeffs) - 1, 0, -1):
            out = out * s + k * self.coeffs[k]
        return out

    @property
    def d2F_at_1(self) -> float:
        out = 0.0
        for k in range(len(self.coeffs) - 1, 1, -1):
            out = out + k * (k - 1) * self.coeffs[k]
        return float(out)

    def V(self, s):
        """V(s) = int_s^1 F, via the exact polynomial antiderivative."""
        return self._P(1.0) - self._P(s)

    def _P(self, s):
        out = 0.0
        for k in range(len(self.coeffs) - 1, -1, -1):
            out = out * s + self.coeffs[k] / (k + 1)
        return out * s

    @property
    def sound_speed(self) -> float:
        return float(np.sqrt(-2.0 * self.dF(1.0)))

    def potential_nonnegative(self, s_max: float = 10.0, samples: int = 10_000):
        s = np.linspace(0.0, s_max, samples)
        return bool(np.all(self.V(s) >= -1e-14))


# ---------------------------------------------------------------------------
# saturating cutoff
# ---------------------------------------------------------------------------


class CutoffPhi:
    """Odd C^2 cutoff: identity on [0,2], saturating at 3 for s >= 4.

    On [2,4] it interpolates as 2 + (s-2)/2 + sin(pi*(s-2)/2)/pi, whose
    derivative (1 + cos(pi*(s-2)/2))/2 stays in [0,1] and vanishes at 4.
    """

    @staticmethod
    def phi(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        mid = 2.0 + (a - 2.0) / 2.0 + np.sin(np.pi * (a - 2.0) / 2.0) / np.pi
        out = np.where(a <= 2.0, a, np.where(a >= 4.0, 3.0, mid))
        return np.sign(s) * out if s.ndim else float(np.sign(s) * out)

    @staticmethod
    def dphi(s):
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        mid = (1.0 + np.cos(np.pi * (a - 2.0) / 2.0)) / 2.0
        out = np.where(a <= 2.0, 1.0, np.where(a >= 4.0, 0.0, mid))
        return out if s.ndim else float(out)


# ---------------------------------------------------------------------------
# scalar functionals
# ---------------------------------------------------------------------------


def _grad(psi: ComplexField):
    return derivative(psi, 1), derivative(psi, 2)


def kinetic(psi: ComplexField) -> float:
    d1, d2 = _grad(psi)
    dens = np.abs(d1.values) ** 2 + np.abs(d2.values) ** 2
    return integrate(ScalarField(psi.grid, dens))


def A(psi: ComplexField) -> float:
    """Kinetic energy transverse to the propagation direction."""
    d2 = derivative(psi, 2)
    return integrate(ScalarField(psi.grid, np.abs(d2.values) ** 2))


def potential_integral(psi: ComplexField, nl: Nonlinearity) -> float:
    dens = nl.V(np.abs(psi.values) ** 2)
    return integrate(ScalarField(psi.grid, dens))


def energy(psi: ComplexField, nl: Nonlinearity) -> float:
    return kinetic(psi) + potential_integral(psi, nl)


def gl_energy(psi: ComplexField) -> float:
    d1, d2 = _grad(psi)
    mod = np.abs(psi.values)
    dens = (
        np.abs(d1.values) ** 2
        + np.abs(d2.values) ** 2
        + 0.5 * (CutoffPhi.phi(mod) ** 2 - 1.0) ** 2
    )
    return integrate(ScalarField(psi.grid, dens))


def D(psi: ComplexField) -> float:
    d1 = derivative(psi, 1)
    mod = np.abs(psi.values)
    dens = np.abs(d1.values) ** 2 + 0.5 * (CutoffPhi.phi(mod) ** 2 - 1.0) ** 2
    return integrate(ScalarField(psi.grid, dens))


def momentum(psi: ComplexField) -> float:
    """Q(psi) = int <i psi_x1, psi> (real inner product <a,b> = Re(a conj b))."""
    d1 = derivative(psi, 1)
    dens = np.real(1j * d1.values * np.conj(psi.values))
    return integrate(ScalarField(psi.grid, dens))


def action_Ec(psi: ComplexField, nl: Nonlinearity, c: float) -> float:
    return energy(psi, nl) - c * momentum(psi)


def functional_I(psi: ComplexField, nl: Nonlinearity) -> float:
    return -momentum(psi) + potential_integral(psi, nl)


def B_c(psi: ComplexField, nl: Nonlinearity, c: float) -> float:
    d1 = derivative(psi, 1)
    k1 = integrate(ScalarField(psi.grid, np.abs(d1.values) ** 2))
    return k1 - c * momentum(psi) + potential_integral(psi, nl)


def P_c(psi: ComplexField, nl: Nonlinearity, c: float, N: int = 2) -> float:
    if N < 2:
        raise ValueError("dimension parameter must be >= 2")
    return action_Ec(psi, nl, c) - (2.0 / (N - 1)) * A(psi)


# ---------------------------------------------------------------------------
# first variations
# ---------------------------------------------------------------------------


def laplacian(psi: ComplexField) -> ComplexField:
    g = psi.grid
    k1sq = g.k1**2
    k2sq = g.k2**2
    F = np.fft.fft2(psi.values)
    out = np.fft.ifft2(-(k1sq[:, None] + k2sq[None, :]) * F)
    return ComplexField(g, out)


def grad_E(psi: ComplexField, nl: Nonlinearity) -> ComplexField:
    lap = laplacian(psi)
    Fs = nl.F(np.abs(psi.values) ** 2)
    return ComplexField(psi.grid, -2.0 * (lap.values + Fs * psi.values))


def grad_Q(psi: ComplexField) -> ComplexField:
    d1 = derivative(psi, 1)
    return ComplexField(psi.grid, 2j * d1.values)


def tw_residual(psi: ComplexField, nl: Nonlinearity, c: float) -> ComplexField:
    """Residual of i*c*psi_x1 + Lap(psi) + F(|psi|^2)psi."""
    d1 = derivative(psi, 1)
    lap = laplacian(psi)
    Fs = nl.F(np.abs(psi.values) ** 2)
    out = 1j * c * d1.values + lap.values + Fs * psi.values
    return ComplexField(psi.grid, out)


def pohozaev_boundary_terms(psi: ComplexField, nl: Nonlinearity, c: float):
    """Boundary line terms of the two dilation identities on a periodic box.

    A traveling wave on the plane satisfies two scaling identities, obtained
    by pairing the equation with x1*d(psi)/dx1 and x2*d(psi)/dx2.  On a
    periodic rectangle the weights x1 and x2 jump at the seam, so each
    identity picks up an explicit line integral over that seam:

        -K1 + K2 + int V       = b1      (stretching along x1),
         K1 - K2 + int V - c*Q = b2      (stretching along x2),

    with K_j = int |d psi/dx_j|^2.  Returns (b1, b2).  Both shrink as the
    box grows, recovering the plane identities; evaluating them separates
    the finite-box effect from a genuine failure of the equation.
    """
    g = psi.grid
    d1 = derivative(psi, 1)
    d2 = derivative(psi, 2)
    k1 = np.abs(d1.values) ** 2
    k2 = np.abs(d2.values) ** 2
    v = nl.V(np.abs(psi.values) ** 2)
    # the seam lines x1 = -L1 and x2 = -L2 are row 0 and column 0
    b1 = -2.0 * g.L1 * g.h2 * np.sum(k1[0, :] - k2[0, :] - v[0, :])
    q_dens = np.real(1j * d1.values * np.conj(psi.values))
    b2 = (
        -2.0
        * g.L2
        * g.h1
        * np.sum(c * q_dens[:, 0] - k1[:, 0] + k2[:, 0] - v[:, 0])
    )
    return float(b1), float(b2)


def extract_speed(psi: ComplexField, nl: Nonlinearity) -> float:
    """Least-squares speed minimizing the L2 norm of the wave residual."""
    d1 = derivative(psi, 1)
    denom = integrate(ScalarField(psi.grid, np.abs(d1.values) ** 2))
    if denom <= 1e-12:
        raise DegenerateDirection("field does not vary along x1")
    lap = laplacian(psi)
    Fs = nl.F(np.abs(psi.values) ** 2)
    rhs = lap.values + Fs * psi.values
    num = integrate(
        ScalarField(psi.grid, np.real(1j * d1.values * np.conj(rhs)))
    )
    return -num / denom


# ---------------------------------------------------------------------------
# lifting psi = rho * exp(i theta)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lifting:
    """Polar decomposition with an unwrapped, periodic phase."""

    rho: ScalarField
    theta: ScalarField
    min_modulus: float


def phase_gradient(psi: ComplexField):
    """(d theta/dx1, d theta/dx2) computed pointwise as Im(conj(psi) grad psi)/|psi|^2.

    This is the exact 1-form d(theta) wherever psi does not vanish; it never
    touches branch cuts.
    """
    d1, d2 = _grad(psi)
    dens = np.abs(psi.values) ** 2
    tx = np.imag(np.conj(psi.values) * d1.values) / dens
    ty = np.imag(np.conj(psi.values) * d2.values) / dens
    return ScalarField(psi.grid, tx), ScalarField(psi.grid, ty)


def lift(psi: ComplexField, delta_min: float = 0.1) -> Lifting:
    """Unwrap psi into modulus and periodic phase.

    Integrates the phase 1-form spectrally (rows along x1, then the
    transverse average along x2), then snaps to the exact branch of
    arg(psi) so the roundtrip rho*exp(i theta) == psi holds to round-off.
    """
    g = psi.grid
    rho = np.abs(psi.values)
    min_mod = float(rho.min())
    if min_mod < delta_min:
        raise ModulusTooSmall(
            f"min |psi| = {min_mod:.3e} below threshold {delta_min:.3e}"
        )
    tx, ty = phase_gradient(psi)

    # circulation along each closed x1-line and along x2 must vanish
    wind1 = g.h1 * np.sum(tx.values, axis=0) / (2.0 * np.pi)
    wind2 = g.h2 * np.mean(np.sum(ty.values, axis=1)) / (2.0 * np.pi)
    if np.max(np.abs(wind1)) > 0.25 or abs(wind2) > 0.25:
        raise NonzeroWinding(
            "phase circulates along a period; no global lifting exists"
        )

    # x1 part: remove quadrature noise in the line means, invert d/dx1
    tx0 = tx.values - np.mean(tx.values, axis=0, keepdims=True)
    F = np.fft.fft(tx0, axis=0)
    inv1 = np.zeros(g.n1, dtype=complex)
    inv1[1:] = 1.0 / (1j * g.k1[1:])
    inv1[g.n1 // 2] = 0.0
    theta_a = np.real(np.fft.ifft(F * inv1[:, None], axis=0))

    # transverse part g(x2): average of ty minus what theta_a already carries
    d2_theta_a = np.real(
        np.fft.ifft(
            np.fft.fft(theta_a, axis=1)
            * np.where(np.arange(g.n2) == g.n2 // 2, 0.0, 1j * g.k2)[None, :],
            axis=1,
        )
    )
    gp = np.mean(ty.values - d2_theta_a, axis=0)
    gp = gp - np.mean(gp)
    inv2 = np.zeros(g.n2, dtype=complex)
    inv2[1:] = 1.0 / (1j * g.k2[1:])
    inv2[g.n2 // 2] = 0.0
    trans = np.real(np.fft.ifft(np.fft.fft(gp) * inv2))
    theta = theta_a + trans[None, :]

    # anchor at the most trustworthy point, then snap to the exact branch
    i0, j0 = np.unravel_index(np.argmax(rho), rho.shape)
    ang = np.angle(psi.values)
    theta = theta + (ang[i0, j0] - theta[i0, j0])
    theta = ang + 2.0 * np.pi * np.round((theta - ang) / (2.0 * np.pi))

    return Lifting(
        rho=ScalarField(g, rho),
        theta=ScalarField(g, theta),
        min_modulus=min_mod,
    )

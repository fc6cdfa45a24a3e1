"""Explicit comparison fields: slow phase modulations and transonic lumps.

Two families of nearly-constant complex fields are built here.  The
modulation family spreads a compactly supported phase profile chi over
longer and longer scales; its energy-to-momentum ratio approaches the
sound speed.  The transonic family dresses a KP-I lump w into an order
parameter whose energy-momentum excess follows a cubic law in the small
parameter eps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import RhoNonpositive
from .grid import ComplexField, Grid, ScalarField, antiderivative_x, derivative

SOUND_SPEED = float(np.sqrt(2.0))


def default_bump(grid: Grid, radius: float | None = None) -> ScalarField:
    """Smooth compactly supported bump exp(1 - 1/(1-|x/r|^2)).

    Radius defaults to half the smaller half-length so the support sits
    well inside the rectangle.
    """
    if radius is None:
        radius = 0.5 * min(grid.L1, grid.L2)
    X1, X2 = grid.meshgrid()
    r2 = (X1**2 + X2**2) / radius**2
    vals = np.zeros_like(r2)
    inside = r2 < 1.0
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return ScalarField(grid, vals)


@dataclass(frozen=True)
class ModulationParams:
    """Slow-modulation family built on a phase profile chi.

    The constructed field is rho * exp(-i*eps*theta) with
    theta(x) = chi(x1/lam, x2/sigma) and
    rho = 1 + (eps/(sqrt(2)*lam)) * (d chi/d x1)(x1/lam, x2/sigma).
    """

    chi: ScalarField
    eps: float
    lam: float
    sigma: float

    def __post_init__(self):
        if min(self.eps, self.lam, self.sigma) <= 0:
            raise ValueError("eps, lam, sigma must be positive")
        if self.lam > self.sigma:
            raise ValueError("requires lam <= sigma (slower transverse scale)")


def modulation_ansatz(p: ModulationParams) -> ComplexField:
    """Build the modulated field on the grid stretched by (lam, sigma).

    Because the output grid is the chi-grid dilated by (lam, sigma), the
    composed functions chi(x1/lam, x2/sigma) are sampled exactly: their
    values coincide with the chi samples.
    """
    g0 = p.chi.grid
    dchi = derivative(p.chi, 1)
    rho = 1.0 + (p.eps / (np.sqrt(2.0) * p.lam)) * dchi.values
    if np.min(rho) <= 0.0:
        raise RhoNonpositive(
            f"modulation amplitude eps/lam = {p.eps / p.lam:.3e} drives "
            "the density through zero"
        )
    theta = p.chi.values
    out_grid = replace(g0, L1=p.lam * g0.L1, L2=p.sigma * g0.L2)
    return ComplexField(out_grid, rho * np.exp(-1j * p.eps * theta))


@dataclass(frozen=True)
class TransonicParams:
    """Lump-dressed family U_eps = rho_eps * exp(-i*theta_eps).

    rho_eps(x,y) = 1 + eps^2 w(eps*x, eps^2*y) and
    theta_eps(x,y) = eps*phi(eps*x, eps^2*y) with phi the x-antiderivative
    of w scaled by the sound speed.
    """

    w: ScalarField
    gamma: float
    eps: float

    def __post_init__(self):
        if self.gamma == 0.0:
            raise ValueError("gamma must be nonzero")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        sup = float(np.max(np.abs(self.w.values)))
        if not (0.2 < 1.0 - self.eps**2 * sup and 1.0 + self.eps**2 * sup < 1.8):
            raise ValueError("eps too large: density leaves (0.2, 1.8)")


def transonic_ansatz(p: TransonicParams) -> ComplexField:
    """Build U_eps on the grid stretched by (1/eps, 1/eps^2).

    Exact by the same sampling argument as the modulation family: the lump
    grid dilated by (1/eps, 1/eps^2) carries w(eps*x, eps^2*y) with the
    original sample values.
    """
    g0 = p.w.grid
    phi = antiderivative_x(p.w)
    rho = 1.0 + p.eps**2 * p.w.values
    if np.min(rho) <= 0.0:
        raise RhoNonpositive("density through zero in the transonic family")
    theta = p.eps * SOUND_SPEED * phi.values
    out_grid = replace(g0, L1=g0.L1 / p.eps, L2=g0.L2 / p.eps**2)
    return ComplexField(out_grid, rho * np.exp(-1j * theta))

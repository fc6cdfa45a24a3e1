"""Periodic rectangular domain with spectral calculus.

The domain is the rectangle [-L1, L1) x [-L2, L2) with periodic
identification, sampled on an n1 x n2 tensor grid.  Arrays are indexed
``values[i, j]`` with axis 0 running along x1 and axis 1 along x2.  All
differentiation, integration and resampling go through the trigonometric
interpolant, so identities that hold for band-limited data hold to
round-off here.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L1, L1) x [-L2, L2).

    Parameters
    ----------
    L1, L2 : float
        Half-lengths of the rectangle.
    n1, n2 : int
        Number of sample points per direction; must be even and >= 8.
    """

    L1: float
    L2: float
    n1: int
    n2: int

    def __post_init__(self):
        if self.L1 <= 0 or self.L2 <= 0:
            raise ValueError("half-lengths must be positive")
        for n in (self.n1, self.n2):
            if n < 8 or n % 2 != 0:
                raise ValueError("point counts must be even and >= 8")

    @property
    def h1(self) -> float:
        return 2.0 * self.L1 / self.n1

    @property
    def h2(self) -> float:
        return 2.0 * self.L2 / self.n2

    @property
    def x1(self) -> np.ndarray:
        """Sample coordinates along axis 0, from -L1 to L1 - h1."""
        return -self.L1 + self.h1 * np.arange(self.n1)

    @property
    def x2(self) -> np.ndarray:
        return -self.L2 + self.h2 * np.arange(self.n2)

    @property
    def k1(self) -> np.ndarray:
        """Wavenumbers along axis 0 (integer multiples of pi/L1, FFT order)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n1, d=self.h1)

    @property
    def k2(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n2, d=self.h2)

    def meshgrid(self):
        """Coordinate arrays X1, X2 of shape (n1, n2)."""
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2


def _check_values(grid: Grid, values: np.ndarray) -> None:
    if values.shape != (grid.n1, grid.n2):
        raise ValueError(
            f"values shape {values.shape} does not match grid "
            f"({grid.n1}, {grid.n2})"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("field values must be finite")


@dataclass(frozen=True)
class ScalarField:
    """Real-valued samples on a Grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        _check_values(self.grid, self.values)


@dataclass(frozen=True)
class ComplexField:
    """Complex-valued samples on a Grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        _check_values(self.grid, self.values)


@dataclass(frozen=True)
class Spectrum:
    """Raw 2D FFT coefficients of a field, indexed (k1, k2) in FFT order."""

    grid: Grid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=complex)
        )
        _check_values(self.grid, self.coefficients)


Field = ScalarField | ComplexField


def _wrap_like(f: Field, values: np.ndarray) -> Field:
    if isinstance(f, ScalarField):
        return ScalarField(f.grid, values.real)
    return ComplexField(f.grid, values)


def spectrum(f: Field) -> Spectrum:
    """Forward 2D FFT of the samples (unnormalized coefficients)."""
    return Spectrum(f.grid, np.fft.fft2(f.values))


def from_spectrum(s: Spectrum, kind: str = "complex") -> Field:
    """Inverse of :func:`spectrum`; ``kind`` selects the field type."""
    values = np.fft.ifft2(s.coefficients)
    if kind == "real":
        return ScalarField(s.grid, values.real)
    return ComplexField(s.grid, values)


def derivative(f: Field, axis: int) -> Field:
    """Spectral partial derivative along x1 (axis=1) or x2 (axis=2).

    The Nyquist mode is zeroed so real fields map to real fields and the
    discrete integration-by-parts identity is exact.
    """
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    g = f.grid
    ax = axis - 1
    k = g.k1 if axis == 1 else g.k2
    ik = 1j * k
    ik[len(k) // 2] = 0.0  # drop the Nyquist mode
    shape = [1, 1]
    shape[ax] = len(k)
    F = np.fft.fft(f.values, axis=ax)
    out = np.fft.ifft(F * ik.reshape(shape), axis=ax)
    return _wrap_like(f, out)


def integrate(f: Field) -> float:
    """Trapezoid rule on the periodic grid (= spectrally exact midpoint)."""
    total = np.sum(f.values) * f.grid.cell_area
    return float(total.real) if np.iscomplexobj(f.values) else float(total)


def antiderivative_x(f: Field, tol_mean: float = 1e-10):
    """Inverse of ``derivative(., 1)`` on zero-x-mean fields.

    Raises NonZeroXMean when some x1-line of f has a mean exceeding
    ``tol_mean`` relative to the field's sup-norm, since such an f is not
    an x1-derivative of any periodic function.
    """
    from .errors import NonZeroXMean

    g = f.grid
    scale = np.max(np.abs(f.values)) + 1e-300
    row_means = np.mean(f.values, axis=0)
    worst = np.max(np.abs(row_means)) / scale
    if worst > tol_mean:
        raise NonZeroXMean(
            f"per-line x1-means reach {worst:.3e} relative (tol {tol_mean:.1e})"
        )
    ik = 1j * g.k1
    inv = np.zeros_like(ik)
    inv[1:] = 1.0 / ik[1:]
    inv[g.n1 // 2] = 0.0
    F = np.fft.fft(f.values, axis=0)
    out = np.fft.ifft(F * inv[:, None], axis=0)
    return _wrap_like(f, out)


def dilate(f: Field, lam: float, sigma: float) -> Field:
    """The field x -> f(x1/lam, x2/sigma) on the stretched grid.

    Sample values are unchanged; only the grid's half-lengths scale to
    (lam*L1, sigma*L2), so the operation is exact (no interpolation).
    """
    if lam <= 0 or sigma <= 0:
        raise ValueError("dilation factors must be positive")
    g = f.grid
    new_grid = replace(g, L1=lam * g.L1, L2=sigma * g.L2)
    if isinstance(f, ScalarField):
        return ScalarField(new_grid, f.values.copy())
    return ComplexField(new_grid, f.values.copy())


def reflect(f: Field, sign: str) -> Field:
    """Splice f with its x2-mirror about x2 = 0.

    sign '+' keeps the upper half-plane (x2 >= 0) and mirrors it onto the
    lower one; '-' keeps the lower half.  On the symmetric grid the mirror
    x2 -> -x2 is an exact index permutation.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    g = f.grid
    j = np.arange(g.n2)
    mirrored = f.values[:, (-j) % g.n2]
    keep_upper = g.x2 >= 0
    if sign == "+":
        out = np.where(keep_upper[None, :], f.values, mirrored)
    else:
        out = np.where(keep_upper[None, :], mirrored, f.values)
    return _wrap_like(f, out)


def _eval_matrix(n: int, L_old: float, x_new: np.ndarray) -> np.ndarray:
    """Dense evaluation matrix of the 1D trigonometric interpolant.

    Row a gives the weights applying to the FFT coefficients so that
    ``E @ fft(v)`` evaluates the interpolant at ``x_new[a]``.  The Nyquist
    mode is split into its cosine part (real-field convention).
    """
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * L_old / n)
    # interpolant p(x) = (1/n) sum_m F_m exp(i k_m (x + L_old))
    phase = np.exp(1j * np.outer(x_new + L_old, k)) / n
    ny = n // 2
    phase[:, ny] = np.cos(k[ny] * (x_new + L_old)) / n
    return phase


def resample(f: Field, new_grid: Grid) -> Field:
    """Evaluate the trigonometric interpolant of f on another grid.

    The new grid must span the same physical rectangle (equal half-lengths);
    use :func:`dilate` to change the rectangle.  Exact for band-limited data
    that the new grid still resolves.
    """
    g = f.grid
    if not (np.isclose(g.L1, new_grid.L1) and np.isclose(g.L2, new_grid.L2)):
        raise ValueError("resample requires matching half-lengths")
    E1 = _eval_matrix(g.n1, g.L1, new_grid.x1)
    E2 = _eval_matrix(g.n2, g.L2, new_grid.x2)
    F = np.fft.fft2(f.values)
    out = E1 @ F @ E2.T
    if isinstance(f, ScalarField):
        return ScalarField(new_grid, out.real)
    return ComplexField(new_grid, out)

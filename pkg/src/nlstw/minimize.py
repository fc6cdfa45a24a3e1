"""Constrained gradient flows for the traveling-wave variational problems.

All solvers share one engine: preconditioned descent along the component of
the objective gradient orthogonal (in the preconditioned metric) to the
constraint gradient, with Armijo backtracking, plus a periodic exact
restoration that snaps the constraint back to machine precision.  The
restorations exploit exact scaling laws of the constraints (momentum and
kinetic energy are exactly quadratic in psi - 1), so they move the iterate
as little as possible and never touch the grid.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import physics
from .ansatz import ModulationParams, default_bump, modulation_ansatz
from .errors import (
    KineticAboveKInfinity,
    MultiplierNonnegative,
    NotConverged,
    PotentialBarrierStuck,
    PotentialNonnegativeEverywhere,
    PotentialNotNonnegative,
)
from .fieldio import write_field
from .grid import (
    ComplexField,
    Grid,
    ScalarField,
    _eval_matrix,
    derivative,
    dilate,
    integrate,
)
from .physics import CutoffPhi, Nonlinearity

# ---------------------------------------------------------------------------
# problem descriptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedMomentum:
    q: float


@dataclass(frozen=True)
class FixedKinetic:
    k: float


@dataclass(frozen=True)
class SharpLocal:
    q: float


@dataclass(frozen=True)
class StationaryBubble:
    pass


@dataclass(frozen=True)
class Regularize:
    h: float
    target: ComplexField


@dataclass(frozen=True)
class MinimizationProblem:
    """A variational problem plus the flow's step policy and tolerances."""

    variant: object
    initial_step: float = 0.2
    backtrack: float = 0.5
    growth: float = 1.1
    grad_tol: float = 1e-6
    constraint_tol: float = 1e-8
    max_iter: int = 200_000
    restore_every: int = 50
    seed: ComplexField | None = None

    def __post_init__(self):
        if self.grad_tol <= 0 or self.constraint_tol <= 0:
            raise ValueError("tolerances must be positive")
        if isinstance(self.variant, (FixedMomentum, SharpLocal)):
            if self.variant.q <= 0:
                raise ValueError("q must be positive")
        if isinstance(self.variant, FixedKinetic) and self.variant.k <= 0:
            raise ValueError("k must be positive")
        if isinstance(self.variant, Regularize) and self.variant.h <= 0:
            raise ValueError("h must be positive")


@dataclass(frozen=True)
class WaveSolution:
    """A converged (or best-effort) field with its multiplier and record."""

    psi: ComplexField
    speed: float
    constraint: float
    energy: float
    momentum: float
    kinetic: float
    potential: float
    gl_energy: float
    pc_residual: float
    tw_residual_norm: float
    iterations: int
    converged: bool

    def sidecar(self, label: str) -> dict:
        return {
            "c": self.speed,
            "q_or_k": self.constraint,
            "E": self.energy,
            "Q": self.momentum,
            "kinetic": self.kinetic,
            "potential": self.potential,
            "EGL": self.gl_energy,
            "pohozaev_residual": self.pc_residual,
            "tw_residual": self.tw_residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "problem": label,
        }

    def save(self, field_path, json_path, label: str = "") -> None:
        write_field(field_path, self.psi)
        with open(json_path, "w") as fh:
            json.dump(self.sidecar(label), fh, indent=2)
            fh.write("\n")


@dataclass(frozen=True)
class CurveResult:
    """A traced dispersion curve with detected thresholds."""

    abscissae: np.ndarray
    values: np.ndarray
    speeds: np.ndarray
    converged: np.ndarray
    family: str
    q0_estimate: float | None = None
    k0_estimate: float | None = None
    k_inf_estimate: float | None = None
    solutions: tuple = field(default=(), repr=False)


# ---------------------------------------------------------------------------
# shared flow machinery
# ---------------------------------------------------------------------------


def _inner(g: Grid, a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum(np.real(a * np.conj(b)))) * g.cell_area


def _norm(g: Grid, a: np.ndarray) -> float:
    return math.sqrt(_inner(g, a, a))


def _precondition(g: Grid, a: np.ndarray, mass: float = 2.0) -> np.ndarray:
    """Apply (2(-Lap) + mass)^{-1}; tames the stiff high modes."""
    k1sq = g.k1**2
    k2sq = g.k2**2
    mult = 1.0 / (2.0 * (k1sq[:, None] + k2sq[None, :]) + mass)
    return np.fft.ifft2(mult * np.fft.fft2(a))


def _tw_rel_residual(psi: ComplexField, nl: Nonlinearity, c: float) -> float:
    """Scale-free size of i*c*psi_x1 + Lap(psi) + F psi."""
    g = psi.grid
    d1 = derivative(psi, 1)
    lap = physics.laplacian(psi)
    Fs = nl.F(np.abs(psi.values) ** 2)
    res = 1j * c * d1.values + lap.values + Fs * psi.values
    scale = (
        abs(c) * _norm(g, d1.values)
        + _norm(g, lap.values)
        + _norm(g, Fs * psi.values)
        + 1e-300
    )
    return _norm(g, res) / scale


class _Flow:
    """One constrained descent run.  Subclasses fill in the problem pieces."""

    mass = 2.0

    def __init__(self, psi: ComplexField, pb: MinimizationProblem):
        self.psi = psi
        self.pb = pb

    # problem pieces ---------------------------------------------------
    def objective(self, psi):  # pragma: no cover - abstract
        raise NotImplementedError

    def grad_objective(self, psi):
        raise NotImplementedError

    def grad_constraint(self, psi):
        raise NotImplementedError

    def restore(self, psi):
        return psi

    def step_allowed(self, psi_new):
        return True

    def converged_enough(self, psi, rel):
        return rel < self.pb.grad_tol

    def residual_size(self, psi, gf, gc, lam):
        g = psi.grid
        res = gf - lam * gc
        scale = _norm(g, gf) + abs(lam) * _norm(g, gc) + 1e-300
        return _norm(g, res) / scale

    # engine -----------------------------------------------------------
    def _projected_gradient(self, psi):
        """Raw gradient, constraint gradient, tangent residual, multiplier."""
        g = psi.grid
        gf = self.grad_objective(psi)
        gc = self.grad_constraint(psi)
        ugc = _inner(g, gc, gc)
        mult = _inner(g, gf, gc) / ugc if ugc > 1e-300 else 0.0
        return gf, gc, gf - mult * gc, mult

    def _direction(self, psi, res, gc, memory):
        """Quasi-Newton direction from the residual history.

        Two-loop recursion seeded with the spectral preconditioner; the
        result is re-projected onto the constraint tangent in the
        preconditioned metric so the constraint drifts only at second
        order.
        """
        g = psi.grid
        q = res.copy()
        alphas = []
        for s, y, rho in reversed(memory):
            a = rho * _inner(g, s, q)
            alphas.append(a)
            q = q - a * y
        r = _precondition(g, q, self.mass)
        for (s, y, rho), a in zip(memory, reversed(alphas)):
            b = rho * _inner(g, y, r)
            r = r + (a - b) * s
        pgc = _precondition(g, gc, self.mass)
        denom = _inner(g, pgc, gc)
        if denom > 1e-300:
            r = r - (_inner(g, r, gc) / denom) * pgc
        return -r

    def run(self):
        pb = self.pb
        psi = self.restore(self.psi)
        g = psi.grid
        step = pb.initial_step
        fval = self.objective(psi)
        it = 0
        rel = np.inf
        self.multiplier = 0.0
        memory = []  # (s, y, 1/<s,y>) pairs for the two-loop recursion
        prev_psi = prev_res = None
        while it < pb.max_iter:
            it += 1
            gf, gc, res, self.multiplier = self._projected_gradient(psi)
            rel = self.residual_size(psi, gf, gc, self.multiplier)
            if self.converged_enough(psi, rel):
                break

            if prev_psi is not None:
                s = psi.values - prev_psi
                y = res - prev_res
                sy = _inner(g, s, y)
                if sy > 1e-14 * _norm(g, s) * _norm(g, y):
                    memory.append((s, y, 1.0 / sy))
                    if len(memory) > 12:
                        memory.pop(0)
            prev_psi, prev_res = psi.values, res

            pdir = self._direction(psi, res, gc, memory)
            slope = _inner(g, gf, pdir)
            if slope >= 0.0:
                # stale curvature: fall back to plain preconditioned descent
                memory.clear()
                pgc = _precondition(g, gc, self.mass)
                pgf = _precondition(g, gf, self.mass)
                denom = _inner(g, pgc, gc)
                lam = _inner(g, pgf, gc) / denom if denom > 1e-300 else 0.0
                pdir = -(pgf - lam * pgc)
                slope = _inner(g, gf, pdir)
                if slope >= 0.0:
                    break  # stationary in the feasible directions
            accepted = False
            t = min(step, 1.0) if memory else step
            while t > 1e-18 * (step + 1.0):
                cand = ComplexField(g, psi.values + t * pdir)
                if self.step_allowed(cand):
                    fcand = self.objective(cand)
                    if fcand <= fval + 1e-4 * t * slope:
                        psi, fval = cand, fcand
                        accepted = True
                        break
                t *= pb.backtrack
            if not accepted:
                break  # step underflow: cannot certify further descent
            step = t * pb.growth

            if it % pb.restore_every == 0:
                new_psi = self.restore(psi)
                if new_psi is not psi:
                    moved = np.max(np.abs(new_psi.values - psi.values))
                    psi = new_psi
                    g = psi.grid
                    fval = self.objective(psi)
                    # only a substantial restoration invalidates curvature
                    if moved > 1e-8 * (np.max(np.abs(psi.values)) + 1e-300):
                        memory.clear()
                        prev_psi = prev_res = None
        psi = self.restore(psi)
        self.iterations = it
        self.final_rel = rel
        return psi


def _solution_record(
    psi: ComplexField,
    nl: Nonlinearity,
    c: float,
    constraint: float,
    iterations: int,
    converged: bool,
) -> WaveSolution:
    E = physics.energy(psi, nl)
    Q = physics.momentum(psi)
    K = physics.kinetic(psi)
    # Pohozaev defect in its periodic-box form: on a finite box the
    # transverse dilation identity reads P_c = b2 with an explicit seam
    # line term b2 (see physics.pohozaev_boundary_terms).
    _, b2 = physics.pohozaev_boundary_terms(psi, nl, c)
    pc = physics.P_c(psi, nl, c, 2) - b2
    return WaveSolution(
        psi=psi,
        speed=c,
        constraint=constraint,
        energy=E,
        momentum=Q,
        kinetic=K,
        potential=physics.potential_integral(psi, nl),
        gl_energy=physics.gl_energy(psi),
        pc_residual=abs(pc) / (abs(E) + 1e-300),
        tw_residual_norm=_tw_rel_residual(psi, nl, c),
        iterations=iterations,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# seeds and exact rescalings
# ---------------------------------------------------------------------------


def _stretch_onto(psi: ComplexField, lam: float, sigma: float, target: Grid):
    """Evaluate x -> psi(x1/lam, x2/sigma) on ``target`` by interpolation.

    Unlike ``dilate`` this keeps the grid fixed: the stretched interpolant is
    sampled (periodically) at the target points.  Near-exact when the field
    is close to constant at the boundary.
    """
    g = psi.grid
    E1 = _eval_matrix(g.n1, g.L1, target.x1 / lam)
    E2 = _eval_matrix(g.n2, g.L2, target.x2 / sigma)
    out = E1 @ np.fft.fft2(psi.values) @ E2.T
    return ComplexField(target, out)


def momentum_seed(grid: Grid, q: float, scale: float = 2.0) -> ComplexField:
    """Slow-modulation field on ``grid`` carrying momentum q (to 1e-10).

    Built from the default bump on the grid shrunk by ``scale`` in both
    directions, so the constructed field lands exactly on ``grid``; the
    modulation amplitude is tuned by a secant iteration.
    """
    base = replace(grid, L1=grid.L1 / scale, L2=grid.L2 / scale)
    chi = default_bump(base, radius=0.7 * base.L1)
    dchi = derivative(chi, 1)
    I1 = integrate(ScalarField(base, dchi.values**2))

    def q_of(eps):
        p = ModulationParams(chi=chi, eps=eps, lam=scale, sigma=scale)
        return physics.momentum(modulation_ansatz(p)), modulation_ansatz(p)

    eps = math.sqrt(abs(q) / (math.sqrt(2.0) * I1))
    val, psi = q_of(eps)
    lo, hi = eps, eps
    while val < q:
        hi *= 1.3
        val, psi = q_of(hi)
    while val > q and lo > 1e-8:
        lo *= 0.7
        val, psi = q_of(lo)
    f = brentq(lambda e: q_of(e)[0] - q, lo, hi, xtol=1e-14, rtol=1e-15)
    _, psi = q_of(f)
    return psi


def kinetic_seed(grid: Grid, k: float, scale: float = 2.0) -> ComplexField:
    """Modulation field on ``grid`` with kinetic energy k (to 1e-10)."""
    base = replace(grid, L1=grid.L1 / scale, L2=grid.L2 / scale)
    chi = default_bump(base, radius=0.7 * base.L1)

    def k_of(eps):
        p = ModulationParams(chi=chi, eps=eps, lam=scale, sigma=scale)
        psi = modulation_ansatz(p)
        return physics.kinetic(psi), psi

    eps = 0.5
    val, _ = k_of(eps)
    while val < k:
        eps *= 1.3
        val, _ = k_of(eps)
    f = brentq(lambda e: k_of(e)[0] - k, 1e-8, eps, xtol=1e-14, rtol=1e-15)
    return k_of(f)[1]


def bubble_seed(grid: Grid, nl: Nonlinearity) -> ComplexField:
    """Real radial dip 1 - A*exp(-r^2/w^2) tuned so int V = 0."""
    X1, X2 = grid.meshgrid()
    prof = np.exp(-(X1**2 + X2**2) / 8.0**2)

    def pv(amp):
        vals = 1.0 - amp * prof
        return physics.potential_integral(
            ComplexField(grid, vals.astype(complex)), nl
        )

    lo, hi = 1e-3, 1.0
    if pv(hi) > 0:
        while pv(hi) > 0 and hi < 1.3:
            hi += 0.05
        if pv(hi) > 0:
            raise PotentialNonnegativeEverywhere(
                "no dip amplitude reaches int V = 0"
            )
    amp = brentq(pv, lo, hi, xtol=1e-14)
    return ComplexField(grid, (1.0 - amp * prof).astype(complex))


# ---------------------------------------------------------------------------
# fixed momentum
# ---------------------------------------------------------------------------


class _MomentumFlow(_Flow):
    def __init__(self, psi, pb, nl, q):
        super().__init__(psi, pb)
        self.nl = nl
        self.q = q

    def objective(self, psi):
        return physics.energy(psi, self.nl)

    def grad_objective(self, psi):
        return physics.grad_E(psi, self.nl).values

    def grad_constraint(self, psi):
        return physics.grad_Q(psi).values

    def restore(self, psi):
        # For psi = 1 + u the momentum is exactly quadratic in u (the
        # linear term integrates to zero on the torus), so scaling u
        # restores the constraint exactly without touching the grid.
        Q = physics.momentum(psi)
        if Q <= 0:
            return psi
        t = math.sqrt(self.q / Q)
        if abs(t - 1.0) < 1e-15:
            return psi
        return ComplexField(psi.grid, 1.0 + t * (psi.values - 1.0))

    def step_allowed(self, psi_new):
        # Near vortex nucleation a long step can slip the phase by a full
        # turn and collapse (or flip) the momentum; the restore cannot undo
        # that, so refuse steps that lose most of the constraint.
        return physics.momentum(psi_new) > 0.25 * self.q

    def converged_enough(self, psi, rel):
        return rel < self.pb.grad_tol


def minimize_fixed_momentum(
    pb: MinimizationProblem, nl: Nonlinearity, grid: Grid | None = None
) -> WaveSolution:
    """Minimize E at fixed momentum q; requires a sign-definite potential."""
    if not isinstance(pb.variant, FixedMomentum):
        raise ValueError("problem variant must be FixedMomentum")
    if not nl.potential_nonnegative():
        raise PotentialNotNonnegative(
            "V changes sign; the global momentum problem is unbounded "
            "below - use the sharp local problem instead"
        )
    return _run_momentum_flow(_MomentumFlow, pb, nl, grid)


def _run_momentum_flow(flow_cls, pb, nl, grid):
    q = pb.variant.q
    if pb.seed is not None:
        psi0 = pb.seed
    else:
        if grid is None:
            grid = Grid(64.0, 64.0, 256, 256)
        psi0 = momentum_seed(grid, q)
    flow = flow_cls(psi0, pb, nl, q)
    psi = flow.run()
    c = physics.extract_speed(psi, nl)
    converged = flow.final_rel < max(pb.grad_tol, 1e-6) * 10 and flow.final_rel < 1e-5
    # a momentum slip past the restore's reach must not pass as converged
    converged = converged and abs(physics.momentum(psi) - q) < 1e-8 * max(1.0, q)
    if isinstance(flow, _SharpFlow):
        pot = physics.potential_integral(psi, nl)
        converged = converged and pot > 0.0
    if not converged and flow.iterations >= pb.max_iter:
        raise NotConverged(
            f"momentum flow hit the iteration cap at rel residual "
            f"{flow.final_rel:.2e}",
            best=_solution_record(psi, nl, c, q, flow.iterations, False),
        )
    return _solution_record(psi, nl, c, q, flow.iterations, converged)


# ---------------------------------------------------------------------------
# sharp local problem (potential-sign barrier)
# ---------------------------------------------------------------------------


class _SharpFlow(_MomentumFlow):
    def step_allowed(self, psi_new):
        if not super().step_allowed(psi_new):
            return False
        return physics.potential_integral(psi_new, self.nl) >= 0.0


def minimize_sharp(
    pb: MinimizationProblem, nl: Nonlinearity, grid: Grid | None = None
) -> WaveSolution:
    """Momentum minimization restricted to the region int V >= 0.

    Steps that would cross the barrier are halved away; when the potential
    is nonnegative anyway this is exactly the global problem and is
    delegated to it.
    """
    if not isinstance(pb.variant, SharpLocal):
        raise ValueError("problem variant must be SharpLocal")
    if nl.potential_nonnegative():
        pb2 = replace(pb, variant=FixedMomentum(pb.variant.q))
        return minimize_fixed_momentum(pb2, nl, grid)
    try:
        return _run_momentum_flow(_SharpFlow, pb, nl, grid)
    except NotConverged as exc:
        best = exc.best
        if best is not None and best.potential <= 1e-12:
            raise PotentialBarrierStuck(
                "flow pinned at the int V = 0 barrier", iterate=best
            ) from exc
        raise


# ---------------------------------------------------------------------------
# stationary bubble (kinetic at zero potential)
# ---------------------------------------------------------------------------


class _BubbleFlow(_Flow):
    def __init__(self, psi, pb, nl):
        super().__init__(psi, pb)
        self.nl = nl

    def objective(self, psi):
        return physics.kinetic(psi)

    def grad_objective(self, psi):
        return physics.laplacian(psi).values * (-2.0)

    def grad_constraint(self, psi):
        Fs = self.nl.F(np.abs(psi.values) ** 2)
        return -2.0 * Fs * psi.values

    def restore(self, psi):
        # amplitude homotopy 1 + a(psi - 1): exact potential zeroing
        base = psi.values - 1.0

        def pv(a):
            return physics.potential_integral(
                ComplexField(psi.grid, 1.0 + a * base), self.nl
            )

        v1 = pv(1.0)
        if abs(v1) < 1e-300:
            return psi
        lo, hi = 0.9, 1.1
        for _ in range(60):
            if pv(lo) * pv(hi) <= 0:
                break
            lo *= 0.98
            hi *= 1.02
        else:
            return psi
        a = brentq(pv, lo, hi, xtol=1e-15, rtol=1e-15)
        return ComplexField(psi.grid, 1.0 + a * base)


def minimize_bubble(
    pb: MinimizationProblem, nl: Nonlinearity, grid: Grid | None = None
):
    """Stationary real bubble: least kinetic energy on the int V = 0 set.

    Returns (WaveSolution with speed 0, T) where T is the converged kinetic
    energy, which also estimates the blow-up abscissa of the kinetic-
    constrained problem.
    """
    if not isinstance(pb.variant, StationaryBubble):
        raise ValueError("problem variant must be StationaryBubble")
    s = np.linspace(0.0, 10.0, 10_000)
    if np.min(nl.V(s)) >= 0.0:
        raise PotentialNonnegativeEverywhere(
            "V >= 0 everywhere: no stationary bubble exists"
        )
    if grid is None:
        grid = Grid(64.0, 64.0, 256, 256)
    psi0 = pb.seed if pb.seed is not None else bubble_seed(grid, nl)
    flow = _BubbleFlow(psi0, pb, nl)
    psi = flow.run()
    T = physics.kinetic(psi)
    converged = flow.final_rel < 1e-5
    if not converged and flow.iterations >= pb.max_iter:
        raise NotConverged(
            f"bubble flow hit the iteration cap at {flow.final_rel:.2e}",
            best=_solution_record(psi, nl, 0.0, 0.0, flow.iterations, False),
        )
    # The flow converges to Lap(psi) = mu * F(|psi|^2) psi; both the kinetic
    # energy and the constraint are dilation-invariant in 2D, so the scale
    # (hence mu) is arbitrary.  Dilating by sqrt(-mu) normalizes the iterate
    # to the stationary equation Lap(psi) + F(|psi|^2) psi = 0.
    mu = flow.multiplier
    if mu >= 0.0:
        raise MultiplierNonnegative(
            f"bubble converged with multiplier {mu:.3e} >= 0"
        )
    s = math.sqrt(-mu)
    psi = dilate(psi, s, s)
    sol = _solution_record(psi, nl, 0.0, 0.0, flow.iterations, converged)
    return sol, T


# ---------------------------------------------------------------------------
# fixed kinetic
# ---------------------------------------------------------------------------


class _KineticFlow(_Flow):
    def __init__(self, psi, pb, nl, k):
        super().__init__(psi, pb)
        self.nl = nl
        self.k = k

    def objective(self, psi):
        return physics.functional_I(psi, self.nl)

    def grad_objective(self, psi):
        d1 = derivative(psi, 1)
        Fs = self.nl.F(np.abs(psi.values) ** 2)
        return -2j * d1.values - 2.0 * Fs * psi.values

    def grad_constraint(self, psi):
        return -2.0 * physics.laplacian(psi).values

    def restore(self, psi):
        # Kinetic energy is exactly quadratic in u = psi - 1, so scaling u
        # restores the constraint exactly at a fixed grid.
        K = physics.kinetic(psi)
        if K <= 0:
            return psi
        t = math.sqrt(self.k / K)
        if abs(t - 1.0) < 1e-15:
            return psi
        return ComplexField(psi.grid, 1.0 + t * (psi.values - 1.0))


def minimize_fixed_kinetic(
    pb: MinimizationProblem,
    nl: Nonlinearity,
    grid: Grid | None = None,
    k_inf: float | None = None,
) -> WaveSolution:
    """Minimize I = -Q + int V at fixed kinetic energy k.

    When the potential dips negative the problem blows up past the bubble
    threshold; the request is rejected if k is not safely below it.  The
    returned solution is the multiplier-rescaled field, which solves the
    traveling-wave equation at speed c = 1/sqrt(-theta).
    """
    if not isinstance(pb.variant, FixedKinetic):
        raise ValueError("problem variant must be FixedKinetic")
    k = pb.variant.k
    if grid is None:
        grid = Grid(64.0, 64.0, 256, 256)
    s = np.linspace(0.0, 10.0, 10_000)
    if np.min(nl.V(s)) < 0.0:
        if k_inf is None:
            _, k_inf = minimize_bubble(
                MinimizationProblem(variant=StationaryBubble()), nl, grid
            )
        if k > 0.95 * k_inf:
            raise KineticAboveKInfinity(
                f"k = {k:.4g} is above the safety margin below the "
                f"threshold estimate {k_inf:.4g}"
            )
    psi0 = pb.seed if pb.seed is not None else kinetic_seed(grid, k)
    flow = _KineticFlow(psi0, pb, nl, k)
    psi = flow.run()
    theta = flow.multiplier
    converged = flow.final_rel < 1e-5
    if not converged and flow.iterations >= pb.max_iter:
        raise NotConverged(
            f"kinetic flow hit the iteration cap at {flow.final_rel:.2e}",
            best=_solution_record(
                psi, nl, 0.0, k, flow.iterations, False
            ),
        )
    if theta >= 0.0:
        raise MultiplierNonnegative(
            f"converged with multiplier {theta:.3e} >= 0: no speed"
        )
    c = 1.0 / math.sqrt(-theta)
    psi_cc = dilate(psi, c, c)
    sol = _solution_record(psi_cc, nl, c, k, flow.iterations, converged)
    return sol


# ---------------------------------------------------------------------------
# regularization
# ---------------------------------------------------------------------------


class _RegularizeFlow(_Flow):
    def __init__(self, psi, pb, h, target):
        super().__init__(psi, pb)
        self.h = h
        self.target = target.values
        self.mass = 2.0 + 2.0 / h**2

    def objective(self, psi):
        diff = psi.values - self.target
        return physics.gl_energy(psi) + _inner(
            psi.grid, diff, diff
        ) / self.h**2

    def grad_objective(self, psi):
        mod = np.abs(psi.values)
        phi = CutoffPhi.phi(mod)
        dphi = CutoffPhi.dphi(mod)
        safe = np.where(mod > 1e-300, mod, 1.0)
        H = (phi**2 - 1.0) * phi * dphi * psi.values / safe
        lap = physics.laplacian(psi).values
        return (
            -2.0 * lap
            + 2.0 * H
            + (2.0 / self.h**2) * (psi.values - self.target)
        )

    def grad_constraint(self, psi):
        return np.zeros_like(psi.values)

    def residual_size(self, psi, gf, gc, lam):
        g = psi.grid
        scale = (
            2.0 * _norm(g, physics.laplacian(psi).values)
            + (2.0 / self.h**2) * _norm(g, psi.values - self.target)
            + _norm(g, psi.values) / self.h**2
            + 1e-300
        )
        return _norm(g, gf) / scale


def regularize(
    psi: ComplexField, h: float, pb: MinimizationProblem | None = None
) -> ComplexField:
    """Proximal smoothing: descend E_GL + ||zeta - psi||^2/h^2 from psi.

    By monotone descent from the starting point the output obeys
    E_GL(zeta) <= E_GL(psi) and ||zeta - psi||^2 <= h^2 E_GL(psi).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if pb is None:
        pb = MinimizationProblem(variant=Regularize(h=h, target=psi))
    flow = _RegularizeFlow(psi, pb, h, psi)
    out = flow.run()
    if flow.final_rel > 1e-4 and flow.iterations >= pb.max_iter:
        raise NotConverged(
            f"regularization stalled at {flow.final_rel:.2e}", best=out
        )
    return out


# ---------------------------------------------------------------------------
# curve tracing
# ---------------------------------------------------------------------------


def _curve_point(family, x, nl, grid, base, seed, k_inf):
    """Solve one curve point; returns (value, speed, converged, solution)."""
    try:
        if family == "momentum":
            problem = replace(base, variant=FixedMomentum(q=x), seed=seed)
            if nl.potential_nonnegative():
                sol = minimize_fixed_momentum(problem, nl, grid)
            else:
                problem = replace(base, variant=SharpLocal(q=x), seed=seed)
                sol = minimize_sharp(problem, nl, grid)
            value = sol.energy
        else:
            problem = replace(base, variant=FixedKinetic(k=x), seed=seed)
            sol = minimize_fixed_kinetic(problem, nl, grid, k_inf=k_inf)
            value = physics.functional_I(
                dilate(sol.psi, 1.0 / sol.speed, 1.0 / sol.speed), nl
            )
        return value, sol.speed, sol.converged, sol
    except NotConverged as exc:
        if exc.best is not None:
            value = exc.best.energy if family == "momentum" else np.nan
            return value, exc.best.speed, False, exc.best
        return np.nan, np.nan, False, None


def trace_curve(
    family: str,
    abscissae,
    nl: Nonlinearity,
    grid: Grid | None = None,
    warm_start: bool = True,
    pb: MinimizationProblem | None = None,
    k_inf: float | None = None,
    workers: int = 1,
) -> CurveResult:
    """Solve a ladder of constrained problems and assemble the curve.

    family 'momentum' traces (q, E_min, c); 'kinetic' traces (k, I_min, c).
    Warm starts rescale the previous solution exactly onto the next
    constraint before re-solving.  Independent points fan out to
    ``workers`` threads only when warm starts are disabled (warm starts
    impose a sequential dependency).
    """
    absc = np.asarray(list(abscissae), dtype=float)
    if len(absc) == 0:
        raise ValueError("empty abscissa list")
    if np.any(np.diff(absc) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    if family not in ("momentum", "kinetic"):
        raise ValueError("family must be 'momentum' or 'kinetic'")
    if grid is None:
        grid = Grid(64.0, 64.0, 256, 256)

    values = np.full(len(absc), np.nan)
    speeds = np.full(len(absc), np.nan)
    flags = np.zeros(len(absc), dtype=bool)
    base = pb if pb is not None else MinimizationProblem(
        variant=FixedMomentum(q=1.0)
    )

    if not warm_start and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda x: _curve_point(
                        family, x, nl, grid, base, None, k_inf
                    ),
                    absc,
                )
            )
        sols = []
        for i, (val, spd, ok, sol) in enumerate(results):
            values[i], speeds[i], flags[i] = val, spd, ok
            sols.append(sol)
    else:
        sols = []
        prev = None
        for i, x in enumerate(absc):
            seed = None
            if warm_start and prev is not None and prev.converged:
                if family == "momentum":
                    sigma = x / physics.momentum(prev.psi)
                    seed = _stretch_onto(prev.psi, sigma, sigma, grid)
                else:
                    seed = _stretch_onto(prev.psi, 1.0, 1.0, grid)
            val, spd, ok, sol = _curve_point(
                family, x, nl, grid, base, seed, k_inf
            )
            values[i], speeds[i], flags[i] = val, spd, ok
            sols.append(sol)
            if ok:
                prev = sol

    vs = nl.sound_speed
    q0 = k0 = None
    tol = 1e-6 * max(1.0, np.nanmax(np.abs(values)))
    if family == "momentum":
        for x, v, ok in zip(absc, values, flags):
            if ok and vs * x - v > 10.0 * tol:
                q0 = float(x)
                break
    else:
        for x, v, ok in zip(absc, values, flags):
            if ok and (-x / vs**2) - v > 10.0 * tol:
                k0 = float(x)
                break
    return CurveResult(
        abscissae=absc,
        values=values,
        speeds=speeds,
        converged=flags,
        family=family,
        q0_estimate=q0,
        k0_estimate=k0,
        k_inf_estimate=k_inf,
        solutions=tuple(sols),
    )

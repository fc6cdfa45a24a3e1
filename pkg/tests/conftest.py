"""Shared fixtures: small converged waves reused across test modules."""

import numpy as np
import pytest

from nlstw import (
    FixedMomentum,
    Grid,
    MinimizationProblem,
    Nonlinearity,
    minimize_fixed_momentum,
)


@pytest.fixture(scope="session")
def gp():
    return Nonlinearity.gross_pitaevskii()


@pytest.fixture(scope="session")
def cq():
    return Nonlinearity.cubic_quintic(3.0)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(16.0, 16.0, 64, 64)


@pytest.fixture(scope="session")
def small_wave(gp, small_grid):
    """A converged fixed-momentum wave on a small box, for identity tests."""
    pb = MinimizationProblem(variant=FixedMomentum(q=2.0))
    sol = minimize_fixed_momentum(pb, gp, small_grid)
    assert sol.converged
    return sol

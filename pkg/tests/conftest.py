"""Shared, session-cached fixtures: models, wave trains and spirals."""

import sys

import numpy as np
import pytest

from spiralspec.discretize import PolarGrid
from spiralspec.kinetics import barkley_model
from spiralspec.spiral import bootstrap_time_evolution, interpolate_spiral, solve_spiral
from spiralspec.wavetrain import simulate_wavetrain, solve_wavetrain


@pytest.fixture(scope="session")
def barkley():
    return barkley_model()


@pytest.fixture(scope="session")
def wavetrain(barkley):
    """Wave train at k = 0.5 seeded by a 1D periodic simulation."""
    prof, om = simulate_wavetrain(barkley, 0.5, M=128, t_end=60.0)
    return solve_wavetrain(barkley, 0.5, prof, om, tol=1e-12)


@pytest.fixture(scope="session")
def coarse_spiral(barkley):
    """Spiral on the coarse bootstrap grid R = 25, h_r = 0.25, N_θ = 32."""
    grid = PolarGrid(25.0, 0.25, 32)
    u, om, r2 = bootstrap_time_evolution(barkley, grid, t_end=60.0, dt=0.01)
    sol = solve_spiral(barkley, grid, u, om, maxiter=60)
    sol.bootstrap_r2 = r2
    return sol


@pytest.fixture(scope="session")
def spiral25(barkley, coarse_spiral):
    """Spiral on the production grid R = 25, h_r = 0.05, N_θ = 64."""
    grid = PolarGrid(25.0, 0.05, 64)
    return solve_spiral(barkley, grid, interpolate_spiral(coarse_spiral, grid), coarse_spiral.omega)


@pytest.fixture(scope="session")
def far_wavetrain(spiral25):
    from spiralspec.spiral import far_field_wavetrain

    return far_field_wavetrain(spiral25)


@pytest.fixture(scope="session")
def sigma_abs(far_wavetrain):
    from spiralspec.spatial import absolute_spectrum

    return absolute_spectrum(far_wavetrain, window=(-2.0, 0.5, -1.0, 4.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)



def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines after the run."""
    lines = [l for name, mod in list(sys.modules.items()) if name.endswith("test_acceptance")
             for l in getattr(mod, "LINES", [])]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(set(lines)):
            terminalreporter.write_line(line)

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from spiralspec.discretize import PolarGrid
from spiralspec.linalg import min_singular_value
from spiralspec.spiral import (
    condition_map,
    far_field_correlation,
    interpolate_spiral,
    linearization,
    pseudospectrum_field,
    solve_spiral,
    spiral_spectrum,
    steady_residual,
)


@pytest.fixture(scope="module")
def small_spiral(barkley, coarse_spiral):
    grid = PolarGrid(8.0, 0.25, 64)
    return solve_spiral(barkley, grid, interpolate_spiral(coarse_spiral, grid), coarse_spiral.omega)


def test_bootstrap_rotation_fit(coarse_spiral):
    assert coarse_spiral.bootstrap_r2 >= 0.99
    assert coarse_spiral.omega > 0


def test_newton_residual(coarse_spiral, spiral25):
    for sol in (coarse_spiral, spiral25):
        r = steady_residual(sol.model, sol.grid, sol.profile, sol.omega, sol.bc)
        assert np.abs(r).max() <= 1e-8


def test_newton_fixed_point(coarse_spiral):
    again = solve_spiral(coarse_spiral.model, coarse_spiral.grid, coarse_spiral.profile, coarse_spiral.omega)
    assert again.iterations <= 1
    assert np.abs(again.profile - coarse_spiral.profile).max() <= 1e-8
    assert again.omega == pytest.approx(coarse_spiral.omega, abs=1e-10)


def test_rotation_equivariance(coarse_spiral):
    sol, g = coarse_spiral, coarse_spiral.grid
    rot = sol.rotated(3)
    r = steady_residual(sol.model, g, sol.profile, sol.omega, sol.bc)
    r_rot = steady_residual(sol.model, g, rot.profile, sol.omega, sol.bc)
    np.testing.assert_allclose(r_rot, np.array([g.rotate(x, 3) for x in r]), atol=1e-12)


def test_far_field_matches_wavetrain(spiral25, far_wavetrain):
    assert far_field_correlation(spiral25, far_wavetrain) >= 0.95
    assert far_wavetrain.omega == pytest.approx(spiral25.omega, abs=1e-8)


def test_weighted_similarity_small_radius(small_spiral):
    a = spiral_spectrum(small_spiral, eta=0.0, k=20, shift=0.1).eigenvalues
    b = spiral_spectrum(small_spiral, eta=0.5, k=20, shift=0.1).eigenvalues
    # the two sets may differ at the edge of the k-window
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    near = np.sort(cost[r, c])[:12]
    assert near.max() <= 1e-6


def test_translation_eigenvalue(small_spiral):
    # the radial grid is coarse, so the rotation mode is only approximately
    # in the kernel
    rep = spiral_spectrum(small_spiral, eta=0.0, k=10, shift=0.05)
    assert abs(rep.eigenvalues[rep.zero_index]) <= 1e-5
    assert rep.zero_correlation >= 0.99


def test_pseudospectrum_conjugate_symmetry(small_spiral):
    ps = pseudospectrum_field(small_spiral, window=(-0.5, 0.5, -1.0, 1.0), resolution=(3, 5))
    np.testing.assert_allclose(ps.sigma_min, ps.sigma_min[::-1], rtol=1e-6)


def test_sigma_min_bounded_by_residual(small_spiral):
    A = linearization(small_spiral)
    rep = spiral_spectrum(small_spiral, k=6, shift=-0.3 + 0.5j)
    for lam, res, v in zip(rep.eigenvalues, rep.residuals, rep.eigen.eigenvectors.T):
        rel = res / np.linalg.norm(v)
        assert min_singular_value(A, lam).sigma_min <= max(rel, 1e-14) * 1.01 + 1e-12


def test_condition_map_deterministic(small_spiral):
    lams = [-0.5 + 0.3j, 0.2 + 1.0j]
    a = condition_map(small_spiral, [0.0, -0.5], lams, seed=3)
    b = condition_map(small_spiral, [0.0, -0.5], lams, seed=3)
    assert a == b
    assert all(np.isfinite(r["log10_kappa"]) for r in a)

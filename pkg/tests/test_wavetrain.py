import numpy as np
import pytest

from spiralspec.wavetrain import (
    EquilibriumError,
    NewtonError,
    dispersion_curve,
    group_velocity,
    phase_condition,
    resample_profile,
    solve_wavetrain,
    wavetrain_residual,
)


def test_residual_and_nonconstant(wavetrain):
    assert wavetrain.residual <= 1e-10
    assert not wavetrain.is_constant()
    assert wavetrain.omega > 0


def test_exact_guess_is_fixed_point(barkley, wavetrain):
    again = solve_wavetrain(barkley, wavetrain.k, wavetrain.profile, wavetrain.omega)
    assert again.iterations == 0
    np.testing.assert_array_equal(again.profile, wavetrain.profile)


def test_translated_guess_keeps_frequency(barkley, wavetrain):
    shifted = wavetrain.shifted(0.3)
    again = solve_wavetrain(barkley, wavetrain.k, shifted.profile, wavetrain.omega)
    assert again.omega == pytest.approx(wavetrain.omega, abs=1e-10)
    assert abs(phase_condition(shifted.profile, again.profile)) <= 1e-10


def test_refined_grid_residual(barkley, wavetrain):
    fine = resample_profile(wavetrain.profile, 256)
    res = wavetrain_residual(barkley, wavetrain.k, wavetrain.omega, fine)
    # aliasing of the stiff cubic on 128 points leaves ~2e-6 absolute, ~1e-7 relative
    assert np.abs(res).max() <= 1e-6 * np.abs(barkley.f(fine)).max()
    again = solve_wavetrain(barkley, wavetrain.k, fine, wavetrain.omega, tol=1e-12)
    assert again.omega == pytest.approx(wavetrain.omega, abs=1e-10)


def test_constant_guess_reported(barkley):
    with pytest.raises((EquilibriumError, NewtonError)):
        solve_wavetrain(barkley, 0.5, np.zeros((2, 64)), 1.0)


def test_phase_condition_properties(wavetrain):
    ref = wavetrain.profile
    assert phase_condition(ref, ref) == 0.0
    d = 1e-4
    norm2 = (2 * np.pi / wavetrain.M) * np.sum(wavetrain.derivative() ** 2)
    # translating by d moves the profile by -d·u' to first order
    val = phase_condition(ref, wavetrain.shifted(d).profile)
    assert val == pytest.approx(-d * norm2, rel=1e-3)


def test_group_velocity_positive_and_richardson(wavetrain):
    cg, err = group_velocity(wavetrain, dk=2e-3)
    assert cg > 0
    assert err <= 1e-3 * abs(cg)


def test_dispersion_curve_passes_through_seed(barkley, wavetrain):
    curve = dispersion_curve(barkley, (wavetrain.k - 0.05, wavetrain.k + 0.05), wavetrain, ds=0.02)
    assert np.all(np.diff(curve.k) > 0)
    i = int(np.argmin(np.abs(curve.k - wavetrain.k)))
    assert curve.omega[i] == pytest.approx(wavetrain.omega, abs=1e-10)
    assert curve.group_velocity > 0

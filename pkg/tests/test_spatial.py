import numpy as np
import pytest
from scipy.optimize import brentq

from spiralspec.convdiff import cd_spatial_eigs
from spiralspec.kinetics import ReactionModel
from spiralspec.spatial import (
    BlochFamily,
    LabelTrackingError,
    WeightPlan,
    absolute_spectrum_trace,
    assemble_awt,
    check_admissibility,
    fredholm_curves,
    hausdorff_distance,
    polyline_distance,
    select_weight,
    spatial_spectrum,
    spectral_gap,
    track_labels,
)
from spiralspec.wavetrain import WaveTrain


@pytest.fixture(scope="module")
def linear_train():
    """Scalar model with constant f_u = -0.3 on a constant 'wave train'."""
    model = ReactionModel(1, np.array([0.7]), f=lambda s: -0.3 * s,
                          f_u=lambda s: np.full((1, 1) + np.shape(s)[1:], -0.3), name="linear")
    return WaveTrain(model, 0.8, 1.1, np.zeros((1, 16)))


def test_awt_eta_shift(wavetrain):
    A = assemble_awt(wavetrain, 0.2 + 0.1j)
    Ae = assemble_awt(wavetrain, 0.2 + 0.1j, eta=0.35)
    e, ee = np.sort_complex(np.linalg.eigvals(A)), np.sort_complex(np.linalg.eigvals(Ae))
    np.testing.assert_allclose(ee, e + 0.35, atol=1e-9)


def test_awt_zero_root(wavetrain):
    nus = np.linalg.eigvals(assemble_awt(wavetrain, 0.0))
    assert np.min(np.abs(nus)) <= 1e-8


def test_awt_constant_coefficients(linear_train):
    lam = 0.4 - 0.2j
    nus = np.linalg.eigvals(assemble_awt(linear_train, lam))
    m = np.arange(-7, 8)
    k, om, d = 0.8, 1.1, 0.7
    root = np.sqrt((lam - 1j * om * m + 0.3) / d + 0j)
    expect = np.concatenate([-1j * k * m + root, -1j * k * m - root])
    dist = np.abs(nus[:, None] - expect[None, :]).min(axis=1)
    assert dist.max() <= 1e-10


def test_split_at_positive_lambda(wavetrain):
    sp = spatial_spectrum(wavetrain, 1.0)
    assert sp.nu_m1.real < 0 < sp.nu_0.real
    assert np.all(np.diff(sp.nus.real) >= -1e-12)


def test_conjugation_symmetry(wavetrain):
    a = spatial_spectrum(wavetrain, 0.3 + 0.7j, n_keep=5).nus
    b = spatial_spectrum(wavetrain, 0.3 - 0.7j, n_keep=5).nus
    assert polyline_distance(np.conj(a), np.repeat(b, 2)).max() <= 1e-8 or \
        np.abs(np.sort_complex(np.conj(a)) - np.sort_complex(b)).max() <= 1e-8


def test_barkley_label_crossing(wavetrain):
    path = np.linspace(0.1 + 0.5j, -1.0 + 0.5j, 56)
    tp = track_labels(wavetrain, path)
    assert tp.nu_m1[0].real < 0
    assert tp.nu_m1[-1].real > 0


def test_constant_path_keeps_labels(wavetrain):
    tp = track_labels(wavetrain, [0.5 + 0.2j, 0.5 + 0.2j], from_anchor=False)
    assert tp.nu_m1[0] == tp.nu_m1[-1] and tp.nu_0[0] == tp.nu_0[-1]


def test_closed_loop_returns(wavetrain):
    loop = 0.4 + 0.3j + 0.2 * np.exp(1j * np.linspace(0, 2 * np.pi, 41))
    tp = track_labels(wavetrain, loop, max_step=0.01)
    assert abs(tp.nu_m1[-1] - tp.nu_m1[0]) <= 1e-8
    assert abs(tp.nu_0[-1] - tp.nu_0[0]) <= 1e-8


def test_tracking_through_branch_point_fails():
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    with pytest.raises(LabelTrackingError):
        track_labels(fam, [-0.25 + 0.0j], max_step=0.05)


def test_gap_contains_zero_for_positive_lambda(wavetrain):
    plan = spectral_gap(spatial_spectrum(wavetrain, 1.0))
    assert plan.J0[0] < 0 < plan.J0[1]


def test_gap_matches_convdiff():
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    for lam in (-0.15, 0.3 + 0.4j, -1.0 + 2.0j):
        plan = spectral_gap(spatial_spectrum(fam, lam, n_keep=1))
        _, _, gap = cd_spatial_eigs(1.0, lam)
        np.testing.assert_allclose(plan.J0, gap, atol=1e-12)


def test_gap_empty_on_absolute_spectrum():
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    assert spectral_gap(spatial_spectrum(fam, -0.7, n_keep=1)).empty


def test_select_weight_policies():
    assert select_weight(WeightPlan(0.5, (-0.3, 0.3))).eta == 0.0
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    assert select_weight(spatial_spectrum(fam, -0.15, n_keep=1)).eta == pytest.approx(0.5)
    with pytest.warns(RuntimeWarning):
        plan = select_weight(WeightPlan(0.5, (-0.3, 0.3)), ("fixed", 2.0))
    assert not plan.inside
    safe = select_weight(WeightPlan(0.5, (-0.3, 0.3)), ("safety", 5.0), theta=0.9)
    assert safe.eta == pytest.approx(0.27)
    with pytest.raises(ValueError):
        select_weight(WeightPlan(0.5, None))


def test_barkley_weight_left_of_fredholm_boundary(far_wavetrain):
    plan = select_weight(spatial_spectrum(far_wavetrain, -1.0 + 0.5j))
    assert plan.inside and plan.eta < 0
    assert select_weight(plan, ("fixed", plan.eta)).inside
    assert select_weight(plan, ("fixed", -1.5)).inside


def test_fredholm_scalar_reduction():
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    g = np.linspace(-2, 2, 41)
    curve = fredholm_curves(fam, eta=0.3, gamma_grid=g, branch_count=1)
    ok = np.isfinite(curve.points)
    pts, g = curve.points[ok], curve.param[ok]
    np.testing.assert_allclose(pts, -(g**2) + 1j * g * (1 - 0.6) + 0.09 - 0.3, atol=1e-12)


def test_fredholm_contains_translation_mode(wavetrain):
    curve = fredholm_curves(wavetrain, 0.0, gamma_grid=np.linspace(-0.1, 0.1, 21))
    assert np.min(np.abs(curve.points[np.isfinite(curve.points)])) <= 1e-8


def test_bloch_periodicity(wavetrain):
    fam = BlochFamily.from_wavetrain(wavetrain)
    for nu in (0.1j, -0.4 + 0.2j):
        a = np.linalg.eigvals(fam.bloch(nu))
        b = np.linalg.eigvals(fam.bloch(nu + 1j * wavetrain.k))
        a = a[np.argsort(-a.real)[:8]]
        assert np.abs(a[:, None] - (b[None, :] + 1j * wavetrain.omega)).min(axis=1).max() <= 1e-8


def test_bloch_elimination_consistency(wavetrain, rng):
    fam = BlochFamily.from_wavetrain(wavetrain)
    for _ in range(10):
        nu = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        ev = np.linalg.eigvals(fam.bloch(nu))
        lam = ev[np.argmax(ev.real)]
        roots = np.linalg.eigvals(assemble_awt(wavetrain, lam))
        assert np.min(np.abs(roots - nu)) <= 1e-8


def test_fredholm_crossing_two_ways(wavetrain):
    """Σ_FB on the line Im λ = 0.5 from the Bloch curves and from Re ν₋₁ = 0."""
    path = np.linspace(0.1 + 0.5j, -1.0 + 0.5j, 111)
    tp = track_labels(wavetrain, path)
    i = int(np.nonzero(np.diff(np.sign(tp.nu_m1.real)))[0][0])
    assert tp.sorted_agree[i] and tp.sorted_agree[i + 1]
    x = brentq(lambda s: spatial_spectrum(wavetrain, s + 0.5j, n_keep=2).nu_m1.real,
               tp.lambdas[i].real, tp.lambdas[i + 1].real, xtol=1e-12)
    fb = fredholm_curves(wavetrain, 0.0).periodic_copies((-1.0, 4.0)).points
    a, b = fb[:-1], fb[1:]
    ok = np.isfinite(a) & np.isfinite(b) & ((a.imag - 0.5) * (b.imag - 0.5) <= 0) & (a.imag != b.imag)
    t = (0.5 - a[ok].imag) / (b[ok].imag - a[ok].imag)
    cross = a[ok] + t * (b[ok] - a[ok])
    assert np.min(np.abs(cross - (x + 0.5j))) <= 1e-3


def test_scalar_absolute_spectrum_trace():
    fam = BlochFamily.scalar(0.0, 1.0, 1.0)
    curve = absolute_spectrum_trace(fam, (-0.5 + 0j, -0.25 + 0j), steps=200, window=(-3, 0.5, -1, 1))
    pts = curve.points
    assert pts[0] == pytest.approx(-0.25)
    assert np.abs(pts.imag).max() <= 1e-8
    assert pts.real.max() <= -0.25 + 1e-10 and pts.real.min() <= -3.0 + 0.1


def test_admissibility(wavetrain):
    rep = check_admissibility(wavetrain)
    assert abs(rep.nu_zero) <= 1e-8
    assert rep.dnu_dlambda.real < 0
    assert rep.relative_mismatch <= 1e-3


def test_constant_profile_not_admissible(barkley):
    flat = WaveTrain(barkley, 0.5, 1.0, np.zeros((2, 32)))
    rep = check_admissibility(flat)
    assert not rep.ok


def test_curve_distances():
    line = np.array([0, 1, np.nan, 2j, 2j + 1])
    np.testing.assert_allclose(polyline_distance([0.5 + 0.5j, 0.5 + 1.5j], line), [0.5, 0.5])
    assert hausdorff_distance(np.array([0, 1.0]), np.array([0.1j, 1 + 0.1j])) == pytest.approx(0.1)

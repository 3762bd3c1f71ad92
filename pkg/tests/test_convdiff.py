import numpy as np
import pytest

from spiralspec.convdiff import (
    ConvDiffProblem,
    cd_analytic_spectrum,
    cd_assemble,
    cd_fredholm_boundary,
    cd_sigma_min,
    cd_spatial_eigs,
)
from spiralspec.linalg import eigs_shift_invert
from spiralspec.spatial import select_weight, spectral_gap


def test_analytic_spectrum_values():
    assert cd_analytic_spectrum(1.0, 1e9, 1)[0] == pytest.approx(-0.25)
    assert cd_analytic_spectrum(0.0, np.pi, 1)[0] == pytest.approx(-1.0)
    assert cd_analytic_spectrum(1.0, np.pi, 2)[1] == pytest.approx(-4.25)


def test_spatial_eigs():
    m1, z, gap = cd_spatial_eigs(1.0, 0.0)
    assert (m1, z) == (pytest.approx(-1.0), pytest.approx(0.0))
    m1, z, gap = cd_spatial_eigs(1.0, -0.25)
    assert m1 == pytest.approx(-0.5) and z == pytest.approx(-0.5) and gap is None
    _, z, _ = cd_spatial_eigs(1.0, -0.15)
    assert z.real == pytest.approx(-0.5 + np.sqrt(0.1), abs=1e-12)


def test_fredholm_boundary_points():
    assert cd_fredholm_boundary(1.0, 0.0, [0.0])[0] == 0
    assert cd_fredholm_boundary(1.0, 0.0, [1.0])[0] == pytest.approx(-1 + 1j)
    ell = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(cd_fredholm_boundary(1.0, 0.5, ell), -(ell**2) - 0.25)


def test_symmetric_at_half_drift():
    A = cd_assemble(ConvDiffProblem(c=1.0, R=10.0, h=0.1, eta=0.5)).matrix
    assert abs(A - A.T).max() == 0.0


def test_eta_zero_plain_matrix():
    A = cd_assemble(ConvDiffProblem(c=1.0, R=5.0, h=0.1, eta=0.0)).matrix.toarray()
    assert A[1, 0] == pytest.approx(1 / 0.01 - 1 / 0.2)
    assert A[0, 1] == pytest.approx(1 / 0.01 + 1 / 0.2)


def test_invalid_problem():
    with pytest.raises(ValueError):
        ConvDiffProblem(c=-1.0)
    with pytest.raises(ValueError):
        ConvDiffProblem(c=1.0, eta=1.5)


@pytest.mark.parametrize("eta", [0.0, 0.25, 0.5])
def test_similarity_small_interval(eta):
    """Weighted and unweighted spectra agree when conditioning is mild."""
    A0 = cd_assemble(ConvDiffProblem(1.0, 10.0, 0.05, 0.0)).matrix.toarray()
    Aw = cd_assemble(ConvDiffProblem(1.0, 10.0, 0.05, eta), form="conjugated").matrix.toarray()
    e0 = np.sort(np.linalg.eigvals(A0).real)
    ew = np.sort(np.linalg.eigvals(Aw).real)
    assert np.abs(e0 - ew).max() <= 1e-6


def test_expanded_form_consistent_with_conjugated():
    """Closed-form weighted stencil differs from exact conjugation only at O(h²)."""
    ex = np.sort(np.linalg.eigvals(cd_assemble(ConvDiffProblem(1.0, 10.0, 0.05, 0.25)).matrix.toarray()).real)
    cj = np.sort(np.linalg.eigvals(
        cd_assemble(ConvDiffProblem(1.0, 10.0, 0.05, 0.25), form="conjugated").matrix.toarray()).real)
    assert np.abs(ex[-5:] - cj[-5:]).max() <= 1e-3


def test_similarity_fails_unweighted_at_large_R():
    """At R = 400 the η = 0 eigenvalues leave the real axis (non-normality)."""
    res = eigs_shift_invert(cd_assemble(ConvDiffProblem(1.0, 400.0, 0.05, 0.0)), k=20, shift=0.0)
    assert np.abs(res.eigenvalues.imag).max() > 1e-2


def test_midpoint_weight_by_vieta():
    m1, z, gap = cd_spatial_eigs(1.0, -0.15)
    assert 0.5 * (gap[0] + gap[1]) == pytest.approx(0.5)


def test_sigma_min_weighted_bounded():
    vals = [cd_sigma_min(ConvDiffProblem(1.0, R, 0.05, 0.5), -0.15) for R in (20, 40)]
    assert max(vals) / min(vals) < 2

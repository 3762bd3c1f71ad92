import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from spiralspec.discretize import IntervalGrid, fd_derivative_1d
from spiralspec.linalg import (
    SingularFactorError,
    condest_1norm,
    eigs_shift_invert,
    lu_factor,
    min_singular_value,
)


def _dirichlet(n=200):
    g = IntervalGrid(1.0, 1.0 / (n + 1))
    return fd_derivative_1d(g, order=2, accuracy=2, bc="dirichlet").matrix


def test_identity_factor():
    b = np.arange(5.0)
    np.testing.assert_array_equal(lu_factor(sp.identity(5)).solve(b), b)


def test_laplacian_residual(rng):
    A = _dirichlet()
    b = rng.standard_normal(A.shape[0])
    x = lu_factor(A).solve(b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) <= 1e-10


def test_adjoint_solve(rng):
    A = sp.random(60, 60, density=0.1, random_state=1) + 5 * sp.identity(60)
    b = rng.standard_normal(60) + 1j * rng.standard_normal(60)
    x = lu_factor(A).solve_adjoint(b)
    np.testing.assert_allclose(A.conj().T @ x, b, atol=1e-10)


def test_singular_reports_pivot():
    A = sp.diags([1.0, 0.0, 2.0]).tocsr()
    with pytest.raises(SingularFactorError) as err:
        lu_factor(A)
    assert err.value.pivot is not None


def test_eigs_diagonal():
    A = sp.diags(np.arange(1.0, 101.0))
    res = eigs_shift_invert(A, k=3, shift=0.0)
    np.testing.assert_allclose(np.sort(res.eigenvalues.real), [1, 2, 3], atol=1e-10)
    assert np.all(np.diff(np.abs(res.eigenvalues)) >= 0)


def test_eigs_convection_diffusion_leading():
    R, h = 20.0, 0.05
    g = IntervalGrid(R, h)
    A = fd_derivative_1d(g, 2, 2, "dirichlet").matrix + fd_derivative_1d(g, 1, 2, "dirichlet").matrix
    res = eigs_shift_invert(A, k=4, shift=0.0)
    lead = res.eigenvalues[np.argmax(res.eigenvalues.real)]
    assert lead.real == pytest.approx(-0.25 - np.pi**2 / R**2, abs=1e-3)


def test_eig_residuals_reverify(rng):
    A = sp.random(300, 300, density=0.02, random_state=3) + sp.diags(rng.uniform(1, 2, 300))
    res = eigs_shift_invert(A, k=10, shift=0.5, tol=1e-10)
    for lam, v in zip(res.eigenvalues, res.eigenvectors.T):
        r = np.linalg.norm(A @ v - lam * v) / np.linalg.norm(v)
        assert r <= 1e-10 * max(1.0, abs(A).sum(0).max())


def test_sigma_min_trivial():
    P = sp.csr_matrix(np.eye(6)[[3, 1, 5, 0, 2, 4]])
    assert min_singular_value(P, 0.0).sigma_min == pytest.approx(1.0, rel=1e-8)
    assert min_singular_value(sp.diags([1.0, 2.0, 3.0]), 0.0).sigma_min == pytest.approx(1.0, rel=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_sigma_min_matches_dense_svd(seed):
    rng = np.random.default_rng(seed)
    A = sp.random(50, 50, density=0.2, random_state=seed) + sp.diags(rng.uniform(0.5, 1.5, 50))
    lam = complex(*rng.uniform(-0.5, 0.5, 2))
    ref = np.linalg.svd(A.toarray() - lam * np.eye(50), compute_uv=False)[-1]
    assert min_singular_value(A, lam).sigma_min == pytest.approx(ref, rel=1e-8)


def test_sigma_min_upper_bounded_by_probes(rng):
    A = _dirichlet(100) + sp.diags(rng.uniform(-1, 1, 100))
    s = min_singular_value(A, 0.3).sigma_min
    M = A - 0.3 * sp.identity(100)
    for _ in range(20):
        v = rng.standard_normal(100)
        assert s <= np.linalg.norm(M @ v) / np.linalg.norm(v) * (1 + 1e-10)


def test_sigma_min_singular_is_zero():
    assert min_singular_value(sp.diags([1.0, 0.0, 2.0, 3.0, 4.0]).tocsr(), 0.0).sigma_min == 0.0


def test_condest_trivial():
    assert condest_1norm(sp.identity(8), 0.0).log10_kappa == pytest.approx(0.0, abs=1e-12)
    assert condest_1norm(sp.diags(np.r_[1.0, 1e6, np.ones(6)]), 0.0).log10_kappa == pytest.approx(6.0, abs=1e-10)


def test_condest_singular_sentinel():
    assert condest_1norm(sp.diags([1.0, 0.0, 2.0, 1.0, 1.0]).tocsr(), 0.0).log10_kappa == np.inf


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_condest_within_factor_three(seed):
    rng = np.random.default_rng(seed)
    A = sp.random(100, 100, density=0.05, random_state=seed) + sp.diags(rng.uniform(0.2, 2.0, 100))
    M = A.toarray()
    exact = np.abs(M).sum(0).max() * np.abs(np.linalg.inv(M)).sum(0).max()
    est = 10 ** condest_1norm(A, 0.0).log10_kappa
    assert exact / 3 <= est <= exact * (1 + 1e-10)


def test_condest_reproducible_with_seed():
    A = _dirichlet(400) + sp.diags(np.linspace(-1, 1, 400))
    assert condest_1norm(A, 0.1, seed=7).log10_kappa == condest_1norm(A, 0.1, seed=7).log10_kappa

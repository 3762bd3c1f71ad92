"""Convection-diffusion ``u_xx + c u_x`` on ``(-R/2, R/2)`` with Dirichlet ends.

Everything about this operator is known in closed form, which makes it the
reference problem for the weighting machinery: the truncated spectrum, the
spatial eigenvalues and their gap, and the weighted Fredholm boundary.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .discretize import IntervalGrid, SparseOperator, fd_derivative_1d
from .linalg import eigs_shift_invert, min_singular_value

__all__ = [
    "ConvDiffProblem",
    "cd_analytic_spectrum",
    "cd_spatial_eigs",
    "cd_fredholm_boundary",
    "cd_absolute_spectrum",
    "cd_assemble",
    "cd_eigenvalues",
    "cd_sigma_min",
]


@dataclass(frozen=True)
class ConvDiffProblem:
    c: float = 1.0
    R: float = 100.0
    h: float = 0.05
    eta: float = 0.0

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError(f"drift speed c must be positive, got {self.c}")
        if self.eta < 0 or self.eta > self.c:
            raise ValueError(f"weight eta must lie in [0, c], got {self.eta}")
        if self.eta > self.c / 2:
            warnings.warn(
                f"eta={self.eta} > c/2 moves the weighted Fredholm boundary back "
                "to the right", RuntimeWarning, stacklevel=3,
            )

    @property
    def grid(self) -> IntervalGrid:
        return IntervalGrid(self.R, self.h)


def cd_analytic_spectrum(c: float, R: float, n_max: int) -> np.ndarray:
    """``-c²/4 - n²π²/R²`` for ``n = 1..n_max``."""
    n = np.arange(1, n_max + 1)
    return -(c**2) / 4 - (n * np.pi / R) ** 2


def cd_spatial_eigs(c: float, lam: complex):
    """Spatial eigenvalues ``(ν₋₁, ν₀)`` of ``λ = ν² + cν`` and the gap ``J₀``.

    The gap is returned as a tuple ``(lo, hi)``, or ``None`` when the real
    parts coincide (λ on the absolute spectrum).
    """
    root = np.sqrt(complex(c**2 / 4 + lam))
    nu_m1 = -c / 2 - root
    nu_0 = -c / 2 + root
    lo, hi = -nu_0.real, -nu_m1.real
    gap = (lo, hi) if hi - lo > 1e-12 else None
    return nu_m1, nu_0, gap


def cd_fredholm_boundary(c: float, eta: float, ells) -> np.ndarray:
    """Weighted Fredholm boundary ``-ℓ² + iℓ(c - 2η) + η² - cη``."""
    ell = np.asarray(ells, dtype=float)
    return -(ell**2) + 1j * ell * (c - 2 * eta) + eta**2 - c * eta


def cd_absolute_spectrum(c: float, depth: float = 50.0, n: int = 2001) -> np.ndarray:
    """Polyline sampling ``(-∞, -c²/4]`` down to ``-c²/4 - depth``."""
    return -(c**2) / 4 - np.linspace(0.0, depth, n) + 0j


def cd_assemble(problem: ConvDiffProblem, form: str = "expanded") -> SparseOperator:
    """Second-order matrix of ``e^{ηx} L_R e^{-ηx}`` on the interior nodes.

    ``form="expanded"`` discretizes ``∂xx + (c - 2η)∂x + (η² - cη)``; at
    ``η = c/2`` the matrix is symmetric.  ``form="conjugated"`` scales the
    entries of the unweighted matrix by ``e^{η(x_i - x_j)}``, which is
    exactly similar to the η = 0 matrix.
    """
    grid = problem.grid
    c, eta = problem.c, problem.eta
    D2 = fd_derivative_1d(grid, order=2, accuracy=2, bc="dirichlet").matrix
    D1 = fd_derivative_1d(grid, order=1, accuracy=2, bc="dirichlet").matrix
    n = D2.shape[0]
    if form == "expanded":
        A = D2 + (c - 2 * eta) * D1 + (eta**2 - c * eta) * sp.identity(n)
    elif form == "conjugated":
        A = sp.coo_matrix(D2 + c * D1)
        x = grid.interior
        fac = np.exp(eta * (x[A.row] - x[A.col]))
        A = sp.csr_matrix((A.data * fac, (A.row, A.col)), shape=(n, n))
    else:
        raise ValueError(f"unknown form {form!r}")
    return SparseOperator(A, meta={"problem": problem, "form": form})


def cd_eigenvalues(problem: ConvDiffProblem, k: int = 20, shift: complex = 0.0,
                   form: str = "expanded", tol: float = 1e-10):
    return eigs_shift_invert(cd_assemble(problem, form), k=k, shift=shift, tol=tol)


def cd_sigma_min(problem: ConvDiffProblem, lam: complex, form: str = "expanded") -> float:
    return min_singular_value(cd_assemble(problem, form), lam).sigma_min

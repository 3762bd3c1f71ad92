"""Direct sparse linear algebra: LU, shift-invert eigenvalues, σ_min, condest.

Disk operators have dense angular blocks, which makes general sparse LU fill
badly.  With the ring-major ordering they are narrow-banded instead, so the
default path is LAPACK's banded LU (``zgbtrf``).  Matrices without a useful
ordering fall back to SuperLU.
"""

from __future__ import annotations

import logging
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack
from scipy.sparse.csgraph import reverse_cuthill_mckee

from .discretize import SparseOperator, as_sparse

log = logging.getLogger(__name__)

__all__ = [
    "SingularFactorError",
    "LUFactor",
    "lu_factor",
    "EigenResult",
    "eigs_shift_invert",
    "ConditionReport",
    "min_singular_value",
    "condest_1norm",
    "onenorm",
]

# ab storage of the banded LU above this size goes to SuperLU instead
BAND_MEMORY_LIMIT = 3.0e9


class SingularFactorError(np.linalg.LinAlgError):
    """Raised when LU finds an exactly zero pivot."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


def _bandwidth(A: sp.spmatrix) -> tuple[int, int]:
    C = sp.coo_matrix(A)
    if C.nnz == 0:
        return 0, 0
    d = C.row - C.col
    return int(max(d.max(), 0)), int(max(-d.min(), 0))


class LUFactor:
    """``PA = LU`` of a square sparse matrix with solve and adjoint solve."""

    def __init__(self, A, ordering=None, backend: str = "auto"):
        if isinstance(A, SparseOperator):
            if ordering is None:
                ordering = A.ordering
        A = as_sparse(A)
        n, m = A.shape
        if n != m:
            raise ValueError(f"matrix must be square, got {A.shape}")
        self.shape = A.shape
        self.n = n
        if backend == "auto":
            backend, ordering = self._choose(A, ordering)
        self.backend = backend
        if backend == "banded":
            self._factor_banded(A, ordering)
        elif backend == "superlu":
            self._factor_superlu(A)
        else:
            raise ValueError(f"unknown backend {backend!r}")

    @staticmethod
    def _choose(A, ordering):
        n = A.shape[0]
        cands = []
        if ordering is not None:
            cands.append(np.asarray(ordering))
        cands.append(None)
        if n > 2:
            pattern = sp.csr_matrix(abs(A) + abs(A.T))
            cands.append(reverse_cuthill_mckee(pattern, symmetric_mode=True))
        best = None
        for p in cands:
            B = A if p is None else A[p][:, p]
            kl, ku = _bandwidth(B)
            cost = (2 * kl + ku + 1) * n * 16
            if best is None or cost < best[0]:
                best = (cost, p, kl, ku)
        cost, p, kl, ku = best
        # banded LU work ~ n kl (kl + ku); use it while it is cheap
        if cost < BAND_MEMORY_LIMIT and (kl + ku) < max(64, 0.25 * n):
            return "banded", p
        return "superlu", None

    def _factor_banded(self, A, ordering):
        self.perm = None if ordering is None else np.asarray(ordering)
        B = A if self.perm is None else A[self.perm][:, self.perm]
        kl, ku = _bandwidth(B)
        self.kl, self.ku = kl, ku
        C = sp.coo_matrix(B)
        ab = np.zeros((2 * kl + ku + 1, self.n), dtype=complex, order="F")
        ab[kl + ku + C.row - C.col, C.col] = C.data
        lub, piv, info = lapack.zgbtrf(ab, kl, ku, overwrite_ab=1)
        if info > 0:
            idx = info - 1
            orig = idx if self.perm is None else int(self.perm[idx])
            raise SingularFactorError(
                f"matrix is exactly singular: zero pivot at index {orig}", pivot=orig
            )
        if info < 0:
            raise ValueError(f"zgbtrf argument error {info}")
        self._lub, self._piv = lub, piv

    def _factor_superlu(self, A):
        try:
            self._slu = spla.splu(sp.csc_matrix(A, dtype=complex))
        except RuntimeError as exc:
            raise SingularFactorError(f"matrix is exactly singular ({exc})") from exc

    def _band_solve(self, b, trans):
        x, info = lapack.zgbtrs(self._lub, self.kl, self.ku, b, self._piv, trans=trans)
        if info != 0:
            raise ValueError(f"zgbtrs failed with info={info}")
        return x

    def solve(self, b, adjoint: bool = False) -> np.ndarray:
        """Solve ``A x = b`` (or ``A^H x = b`` with ``adjoint=True``)."""
        b = np.asarray(b, dtype=complex)
        if self.backend == "superlu":
            return self._slu.solve(b, trans="H" if adjoint else "N")
        p = self.perm
        rhs = b if p is None else b[p]
        y = self._band_solve(rhs, 2 if adjoint else 0)
        if p is None:
            return y
        x = np.empty_like(y)
        x[p] = y
        return x

    def solve_adjoint(self, b) -> np.ndarray:
        return self.solve(b, adjoint=True)


def lu_factor(A, ordering=None, backend: str = "auto") -> LUFactor:
    """Factor a square sparse matrix; raises :class:`SingularFactorError`."""
    return LUFactor(A, ordering=ordering, backend=backend)


def onenorm(A) -> float:
    A = as_sparse(A)
    return float(abs(A).sum(axis=0).max()) if A.nnz else 0.0


def _shifted(A, shift):
    A = as_sparse(A)
    if shift == 0:
        return A
    return sp.csr_matrix(A - shift * sp.identity(A.shape[0], dtype=complex, format="csr"))


def _ordering_of(A):
    return A.ordering if isinstance(A, SparseOperator) else None


# ---------------------------------------------------------------------------
# eigenvalues


@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    eigenvectors: np.ndarray | None = None
    shift: complex = 0.0
    converged: bool = True
    warning: str | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)


def _residuals(A, vals, vecs):
    AV = A @ vecs
    res = np.linalg.norm(AV - vecs * vals[None, :], axis=0)
    return res / np.linalg.norm(vecs, axis=0)


def eigs_shift_invert(
    A,
    k: int = 400,
    shift: complex = 0.0,
    tol: float = 1e-10,
    ncv: int | None = None,
    maxiter: int | None = None,
    return_vectors: bool = True,
    factor: LUFactor | None = None,
) -> EigenResult:
    """The ``k`` eigenvalues of ``A`` closest to ``shift``.

    Implicitly restarted Arnoldi (ARPACK) on ``(A - shift)^{-1}``.  Partial
    convergence returns the converged pairs with ``converged=False``.
    """
    As = as_sparse(A)
    n = As.shape[0]
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if factor is None:
        try:
            factor = lu_factor(_shifted(As, shift), ordering=_ordering_of(A))
        except SingularFactorError as exc:
            raise SingularFactorError(
                f"{exc}; shift {shift} is an eigenvalue, perturb it slightly", exc.pivot
            ) from exc
    nsolve = [0]

    def opinv(x):
        nsolve[0] += 1
        return factor.solve(x)

    if ncv is None:
        ncv = max(2 * k + 1, 60)
    ncv = min(ncv, n)
    if k >= n - 1 or ncv <= k + 1:
        # too small for ARPACK
        vals, vecs = np.linalg.eig(As.toarray())
        converged, warn = True, None
    else:
        Aop = spla.LinearOperator((n, n), matvec=lambda x: As @ x, dtype=complex)
        Op = spla.LinearOperator((n, n), matvec=opinv, dtype=complex)
        try:
            vals, vecs = spla.eigs(
                Aop, k=k, sigma=shift, OPinv=Op, which="LM", tol=tol,
                ncv=ncv, maxiter=maxiter, v0=np.ones(n, dtype=complex) / np.sqrt(n),
            )
            converged, warn = True, None
        except spla.ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            converged = False
            warn = f"ARPACK converged {len(vals)} of {k} eigenvalues"
            warnings.warn(warn, RuntimeWarning, stacklevel=2)
    order = np.argsort(np.abs(vals - shift), kind="stable")[:k]
    vals, vecs = vals[order], vecs[:, order]
    res = _residuals(As, vals, vecs)
    norm1 = onenorm(As)
    diag = {
        "n_solves": nsolve[0],
        "ncv": ncv,
        "onenorm": norm1,
        "residual_ok": res <= max(tol, 1e-14) * max(norm1, 1.0),
    }
    return EigenResult(
        eigenvalues=vals,
        residuals=res,
        eigenvectors=vecs if return_vectors else None,
        shift=shift,
        converged=converged,
        warning=warn,
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# conditioning


_RNG_LOCK = threading.Lock()


@dataclass
class ConditionReport:
    lam: complex
    sigma_min: float = float("nan")
    log10_kappa: float = float("nan")
    methods: tuple = ()

    @property
    def log10_sigma_min(self) -> float:
        if self.sigma_min == 0:
            return -np.inf
        return float(np.log10(self.sigma_min))


def min_singular_value(
    A, lam: complex = 0.0, tol: float = 1e-10, factor: LUFactor | None = None
) -> ConditionReport:
    """Smallest singular value of ``A - lam I``.

    Lanczos on ``(A - lam)^{-1} (A - lam)^{-H}``, using one LU for both
    solves.  An exactly singular shift reports ``sigma_min = 0``.
    """
    As = as_sparse(A)
    n = As.shape[0]
    if factor is None:
        try:
            factor = lu_factor(_shifted(As, lam), ordering=_ordering_of(A))
        except SingularFactorError:
            return ConditionReport(lam, 0.0, methods=("lu-singular",))
    if n <= 3:
        M = _shifted(As, lam).toarray()
        s = np.linalg.svd(M, compute_uv=False)
        return ConditionReport(lam, float(s[-1]), methods=("dense-svd",))

    def mv(x):
        return factor.solve(factor.solve_adjoint(x))

    op = spla.LinearOperator((n, n), matvec=mv, dtype=complex)
    v0 = np.random.default_rng(12345).standard_normal(n).astype(complex)
    with np.errstate(over="ignore", invalid="ignore"):
        mu = spla.eigsh(op, k=1, which="LM", tol=tol, ncv=min(n, 20), v0=v0,
                        return_eigenvectors=False)
    mu = float(np.max(np.abs(mu)))
    if not np.isfinite(mu):
        return ConditionReport(lam, 0.0, methods=("lanczos-overflow",))
    return ConditionReport(lam, 1.0 / np.sqrt(mu), methods=("lanczos-inverse",))


def condest_1norm(
    A, lam: complex = 0.0, factor: LUFactor | None = None, seed: int = 0
) -> ConditionReport:
    """1-norm condition estimate ``||A - lam|| ||(A - lam)^{-1}||`` (Higham–Tisseur).

    The estimator draws random test columns from numpy's global generator;
    it is reseeded with ``seed`` under a lock so results are reproducible.
    """
    As = as_sparse(A)
    M = _shifted(As, lam)
    n = M.shape[0]
    if factor is None:
        try:
            factor = lu_factor(M, ordering=_ordering_of(A))
        except SingularFactorError:
            return ConditionReport(lam, log10_kappa=np.inf, methods=("lu-singular",))
    op = spla.LinearOperator(
        (n, n), matvec=factor.solve, rmatvec=factor.solve_adjoint, dtype=complex
    )
    with np.errstate(over="ignore", invalid="ignore"):
        if n <= 4:
            inv_norm = float(np.abs(np.linalg.inv(M.toarray())).sum(axis=0).max())
        else:
            with _RNG_LOCK:
                state = np.random.get_state()
                np.random.seed(seed)
                try:
                    inv_norm = float(spla.onenormest(op, t=2))
                finally:
                    np.random.set_state(state)
    kappa = onenorm(M) * inv_norm
    if not np.isfinite(kappa):
        return ConditionReport(lam, log10_kappa=np.inf, methods=("onenormest-overflow",))
    return ConditionReport(lam, log10_kappa=float(np.log10(max(kappa, 1.0))),
                           methods=("onenormest",))

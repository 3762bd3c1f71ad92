"""Grids and sparse differentiation operators.

Three families live here: finite differences on an interval, Fourier
differentiation on a periodic grid, and the polar Laplacian on a disk with a
single origin node.  The disk operators are what the spiral linearization is
built from.

Polar unknowns are stored component-major: for each component the origin
comes first, followed by rings ``i = 1 .. N_r - 1`` with ``N_theta`` angles
each.  ``PolarGrid.band_ordering`` gives the ring-major permutation that makes
the assembled operators narrow-banded for the LU in :mod:`spiralspec.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import toeplitz

from .kinetics import ReactionModel

__all__ = [
    "IntervalGrid",
    "PolarGrid",
    "SparseOperator",
    "fd_weights",
    "fd_derivative_1d",
    "fourier_diff",
    "polar_laplacian",
    "polar_operators",
    "assemble_system_operator",
    "conjugate_by_weight",
]


@dataclass(frozen=True)
class SparseOperator:
    """Complex sparse matrix plus the metadata needed to factor it well.

    ``ordering`` is an optional permutation ``p`` such that ``A[p][:, p]`` is
    narrow-banded.
    """

    matrix: sp.csr_matrix
    ordering: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        A = sp.csr_matrix(self.matrix, dtype=complex)
        A.eliminate_zeros()
        A.sort_indices()
        object.__setattr__(self, "matrix", A)

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, x):
        return self.matrix @ x

    def toarray(self):
        return self.matrix.toarray()


def as_sparse(A) -> sp.csr_matrix:
    if isinstance(A, SparseOperator):
        return A.matrix
    if sp.issparse(A):
        return sp.csr_matrix(A, dtype=complex)
    return sp.csr_matrix(np.asarray(A, dtype=complex))


# ---------------------------------------------------------------------------
# interval grids and finite differences


@dataclass(frozen=True)
class IntervalGrid:
    """Uniform grid on ``[start, start + length]`` including both ends."""

    length: float
    spacing: float
    start: float | None = None

    def __post_init__(self):
        if self.length <= 0 or self.spacing <= 0:
            raise ValueError("length and spacing must be positive")
        n = self.length / self.spacing
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(
                f"length {self.length} is not a multiple of spacing {self.spacing}"
            )
        if self.start is None:
            object.__setattr__(self, "start", -self.length / 2)

    @property
    def n_intervals(self) -> int:
        return int(round(self.length / self.spacing))

    @property
    def points(self) -> np.ndarray:
        return self.start + self.spacing * np.arange(self.n_intervals + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.points[1:-1]


def fd_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Fornberg weights for derivatives ``0..m`` at ``z`` on nodes ``x``.

    Returns an array of shape ``(m + 1, len(x))``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c.T


_CENTERED = {
    (1, 2): np.array([-0.5, 0.0, 0.5]),
    (2, 2): np.array([1.0, -2.0, 1.0]),
    (1, 4): np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    (2, 4): np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


def fd_derivative_1d(grid: IntervalGrid, order: int = 2, accuracy: int = 2, bc="dirichlet"):
    """Finite-difference derivative on an interval.

    ``bc`` is one of

    * ``"dirichlet"``: homogeneous Dirichlet values are eliminated; the
      operator acts on ``grid.interior``.  Rows whose centered stencil would
      reach past the boundary drop to second order.
    * ``("robin", beta_left, beta_right)``: ``u_x = beta u`` at both ends via
      second-order ghost points; the operator acts on all points.
    * ``None``: all points, one-sided stencils of the same accuracy near the
      ends.  Useful for consistency checks.
    """
    if (order, accuracy) not in _CENTERED:
        raise ValueError(f"unsupported (order, accuracy) = ({order}, {accuracy})")
    h = grid.spacing
    x = grid.points
    npts = len(x)
    if accuracy == 4 and npts < 7:
        raise ValueError("fourth-order stencils need at least 7 grid points")
    half = accuracy // 2
    rows, cols, vals = [], [], []

    def put(i, j, w):
        rows.append(i)
        cols.append(j)
        vals.append(w)

    if bc is None:
        width = accuracy + order
        for i in range(npts):
            if half <= i < npts - half:
                for s, w in zip(range(-half, half + 1), _CENTERED[(order, accuracy)]):
                    put(i, i + s, w / h**order)
            else:
                lo = 0 if i < half else npts - width
                idx = np.arange(lo, lo + width)
                w = fd_weights(x[i], x[idx], order)[order]
                for j, wj in zip(idx, w):
                    put(i, j, wj)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(npts, npts))
        return SparseOperator(A, meta={"bc": None, "grid": grid})

    if bc == "dirichlet":
        n = npts - 2
        for i in range(n):
            g = i + 1  # global point index
            acc = accuracy if (g - half >= 0 and g + half <= npts - 1) else 2
            hw = acc // 2
            for s, w in zip(range(-hw, hw + 1), _CENTERED[(order, acc)]):
                j = g + s - 1
                if 0 <= j < n and w != 0.0:
                    put(i, j, w / h**order)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return SparseOperator(A, meta={"bc": "dirichlet", "grid": grid})

    if isinstance(bc, tuple) and bc[0] == "robin":
        beta_l, beta_r = float(bc[1]), float(bc[2])
        for i in range(npts):
            acc = accuracy if (i - half >= 0 and i + half <= npts - 1) else 2
            hw = acc // 2
            for s, w in zip(range(-hw, hw + 1), _CENTERED[(order, acc)]):
                if w == 0.0:
                    continue
                j = i + s
                w = w / h**order
                if j == -1:  # ghost: u_{-1} = u_1 - 2 h beta_l u_0
                    put(i, 1, w)
                    put(i, 0, -2 * h * beta_l * w)
                elif j == npts:  # ghost: u_N = u_{N-2} + 2 h beta_r u_{N-1}
                    put(i, npts - 2, w)
                    put(i, npts - 1, 2 * h * beta_r * w)
                else:
                    put(i, j, w)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(npts, npts))
        return SparseOperator(A, meta={"bc": bc, "grid": grid})

    raise ValueError(f"unknown boundary specification {bc!r}")


# ---------------------------------------------------------------------------
# Fourier differentiation


def fourier_diff(N: int, order: int = 1) -> np.ndarray:
    """Spectral differentiation matrix on ``N`` equispaced points of ``[0, 2π)``."""
    if N % 2:
        raise ValueError(f"Fourier differentiation needs an even N, got {N}")
    if N < 4:
        raise ValueError("N must be at least 4")
    h = 2 * np.pi / N
    k = np.arange(1, N)
    col = np.zeros(N)
    if order == 1:
        col[1:] = 0.5 * (-1.0) ** k / np.tan(k * h / 2)
        row = -col
        return toeplitz(col, row)
    if order == 2:
        col[0] = -np.pi**2 / (3 * h**2) - 1 / 6
        col[1:] = -0.5 * (-1.0) ** k / np.sin(k * h / 2) ** 2
        return toeplitz(col)
    raise ValueError(f"unsupported derivative order {order}")


# ---------------------------------------------------------------------------
# polar grid


@dataclass(frozen=True)
class PolarGrid:
    """Disk ``r <= R`` with spacing ``h_r`` and ``N_theta`` angles per ring."""

    R: float
    h_r: float = 0.05
    N_theta: int = 64

    def __post_init__(self):
        n = self.R / self.h_r
        if self.R <= 0 or self.h_r <= 0:
            raise ValueError("R and h_r must be positive")
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"R={self.R} is not an integer multiple of h_r={self.h_r}")
        if self.N_theta < 8 or self.N_theta & (self.N_theta - 1):
            raise ValueError(f"N_theta must be a power of two >= 8, got {self.N_theta}")
        if round(n) < 4:
            raise ValueError("need at least 4 radial intervals")

    @property
    def N_r(self) -> int:
        return int(round(self.R / self.h_r)) + 1

    @property
    def size(self) -> int:
        """Scalar unknowns per component."""
        return self.N_theta * (self.N_r - 1) + 1

    @property
    def r(self) -> np.ndarray:
        return self.h_r * np.arange(self.N_r)

    @property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.N_theta) / self.N_theta

    @property
    def node_r(self) -> np.ndarray:
        return np.concatenate([[0.0], np.repeat(self.r[1:], self.N_theta)])

    @property
    def node_theta(self) -> np.ndarray:
        return np.concatenate([[0.0], np.tile(self.theta, self.N_r - 1)])

    @property
    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        r, t = self.node_r, self.node_theta
        return r * np.cos(t), r * np.sin(t)

    def ring_slice(self, i: int) -> slice:
        """Node indices of ring ``i >= 1`` within one component."""
        start = 1 + (i - 1) * self.N_theta
        return slice(start, start + self.N_theta)

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func(r, theta)`` at every node."""
        return np.asarray(func(self.node_r, self.node_theta))

    def to_rings(self, values: np.ndarray) -> np.ndarray:
        """Ring values as an ``(N_r - 1, N_theta)`` array (origin dropped)."""
        return np.asarray(values)[..., 1:].reshape(
            values.shape[:-1] + (self.N_r - 1, self.N_theta)
        )

    def from_rings(self, origin, rings) -> np.ndarray:
        rings = np.asarray(rings)
        lead = rings.shape[:-2]
        flat = rings.reshape(lead + (-1,))
        return np.concatenate([np.asarray(origin).reshape(lead + (1,)), flat], axis=-1)

    def rotate(self, values: np.ndarray, cells: int = 1) -> np.ndarray:
        """Rotate nodal values by ``cells`` angular grid cells."""
        rings = np.roll(self.to_rings(values), cells, axis=-1)
        return self.from_rings(np.asarray(values)[..., 0], rings)

    def band_ordering(self, n_components: int) -> np.ndarray:
        """Ring-major permutation of component-major unknowns."""
        m, nt = self.size, self.N_theta
        parts = [np.arange(n_components) * m]
        for i in range(1, self.N_r):
            for c in range(n_components):
                start = c * m + 1 + (i - 1) * nt
                parts.append(np.arange(start, start + nt))
        return np.concatenate(parts)

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid-in-r area weights ``r dr dθ`` for nodal values."""
        h, nt = self.h_r, self.N_theta
        w = np.repeat(self.r[1:] * h * (2 * np.pi / nt), nt)
        w[-nt:] *= 0.5
        return np.concatenate([[np.pi * (h / 2) ** 2], w])


def _radial_rows(grid: PolarGrid, beta: float):
    """Stencils of d/dr and d²/dr² on rings 1..N_r-1.

    Returns a list of ``(ring, target, w1, w2)`` where ``target`` is a ring
    index in ``-1 .. N_r - 1`` (0 is the origin, -1 the reflected first ring).
    The boundary ghost ring is already folded in using ``u_r = beta u``.
    """
    h, Nr = grid.h_r, grid.N_r
    out = []
    for i in range(1, Nr):
        if i <= Nr - 3:
            w1, w2 = _CENTERED[(1, 4)] / h, _CENTERED[(2, 4)] / h**2
            offs = range(-2, 3)
        else:
            w1, w2 = _CENTERED[(1, 2)] / h, _CENTERED[(2, 2)] / h**2
            offs = range(-1, 2)
        for s, a1, a2 in zip(offs, w1, w2):
            t = i + s
            if t == Nr:
                # ghost u_N = u_{N-2} + 2 h beta u_{N-1}
                out.append((i, Nr - 2, a1, a2))
                out.append((i, Nr - 1, 2 * h * beta * a1, 2 * h * beta * a2))
            else:
                out.append((i, t, a1, a2))
    return out


def _ring_index(grid: PolarGrid, ring: int, j: np.ndarray) -> np.ndarray:
    nt = grid.N_theta
    if ring == 0:
        return np.zeros_like(j)
    if ring == -1:
        return 1 + (j + nt // 2) % nt
    return 1 + (ring - 1) * nt + j


def polar_operators(grid: PolarGrid, beta: float = 0.0) -> dict[str, sp.csr_matrix]:
    """Scalar building blocks on one component.

    Keys: ``"Dr"``, ``"Drr"`` (radial, origin row zero), ``"Dt"``, ``"Dtt"``
    (angular, origin row zero), ``"origin_lap"`` (origin row of the Laplacian
    only), ``"inv_r"`` and ``"inv_r2"`` (diagonal, zero at the origin).
    """
    m, nt = grid.size, grid.N_theta
    j = np.arange(nt)
    r1, c1, v1 = [], [], []
    r2, c2, v2 = [], [], []
    for i, t, a1, a2 in _radial_rows(grid, beta):
        rows = _ring_index(grid, i, j)
        cols = _ring_index(grid, t, j)
        if a1 != 0.0:
            r1.append(rows), c1.append(cols), v1.append(np.full(nt, a1))
        if a2 != 0.0:
            r2.append(rows), c2.append(cols), v2.append(np.full(nt, a2))
    Dr = sp.csr_matrix(
        (np.concatenate(v1), (np.concatenate(r1), np.concatenate(c1))), shape=(m, m)
    )
    Drr = sp.csr_matrix(
        (np.concatenate(v2), (np.concatenate(r2), np.concatenate(c2))), shape=(m, m)
    )
    F1 = sp.csr_matrix(fourier_diff(nt, 1))
    F2 = sp.csr_matrix(fourier_diff(nt, 2))
    eye_r = sp.identity(grid.N_r - 1, format="csr")
    Dt = sp.block_diag([sp.csr_matrix((1, 1)), sp.kron(eye_r, F1)], format="csr")
    Dtt = sp.block_diag([sp.csr_matrix((1, 1)), sp.kron(eye_r, F2)], format="csr")
    rn = grid.node_r
    inv_r = np.zeros(m)
    inv_r[1:] = 1.0 / rn[1:]
    # angular mean of the four-point cross: rotation-equivariant origin row
    h = grid.h_r
    o_cols = np.concatenate([[0], _ring_index(grid, 1, j)])
    o_vals = np.concatenate([[-4.0 / h**2], np.full(nt, 4.0 / (nt * h**2))])
    origin_lap = sp.csr_matrix(
        (o_vals, (np.zeros(nt + 1, dtype=int), o_cols)), shape=(m, m)
    )
    return {
        "Dr": Dr,
        "Drr": Drr,
        "Dt": Dt,
        "Dtt": Dtt,
        "origin_lap": origin_lap,
        "inv_r": sp.diags(inv_r),
        "inv_r2": sp.diags(inv_r**2),
    }


def polar_laplacian(grid: PolarGrid, bc="neumann") -> SparseOperator:
    """Polar Laplacian with origin node and ghost-point boundary closure.

    ``bc`` is ``"neumann"`` or ``("robin", eta)`` meaning ``u_r = eta u`` at
    ``r = R``.
    """
    beta = _robin_beta(bc)
    ops = polar_operators(grid, beta)
    L = ops["Drr"] + ops["inv_r"] @ ops["Dr"] + ops["inv_r2"] @ ops["Dtt"] + ops["origin_lap"]
    L = sp.csr_matrix(L)
    if beta == 0.0:
        rowsum = abs(L[0].sum())
        if rowsum > 1e-8 * abs(L[0, 0]):
            raise RuntimeError(f"origin row of the Neumann Laplacian has row sum {rowsum}")
    return SparseOperator(L, ordering=grid.band_ordering(1), meta={"bc": bc, "grid": grid})


def _robin_beta(bc) -> float:
    if bc == "neumann" or bc is None:
        return 0.0
    if isinstance(bc, tuple) and bc[0] == "robin":
        return float(bc[1])
    raise ValueError(f"unknown boundary condition {bc!r}")


def conjugate_by_weight(A: sp.spmatrix, weights_exponent: np.ndarray) -> sp.csr_matrix:
    """Entrywise ``A_pq * exp(s_p - s_q)``, i.e. ``S A S^{-1}`` with ``S = diag(e^s)``.

    Only exponent differences between coupled unknowns enter, so large
    ``s`` never overflows.
    """
    C = sp.coo_matrix(A)
    fac = np.exp(weights_exponent[C.row] - weights_exponent[C.col])
    return sp.csr_matrix((C.data * fac, (C.row, C.col)), shape=A.shape)


def assemble_system_operator(
    model: ReactionModel,
    grid: PolarGrid,
    base_state: np.ndarray,
    omega: float,
    eta: float = 0.0,
    bc: tuple[float, float] = (0.0, 1.0),
    form: str = "conjugated",
) -> SparseOperator:
    """Weighted linearization ``e^{ηr} L e^{-ηr}`` on the disk.

    ``L = D Δ + ω ∂_θ + f_u(base_state)`` with boundary condition
    ``a u + b u_r = 0`` (``bc = (a, b)``, ``b != 0``).

    ``form="conjugated"`` scales the entries of the discrete ``L`` by
    ``e^{η(r_p - r_q)}`` so the result is exactly similar to ``L``.
    ``form="expanded"`` discretizes ``L + D[η² - η/r - 2η ∂_r]`` with the
    closure ``(a - bη) w + b w_r = 0``; the origin row is left unweighted.
    """
    base_state = np.asarray(base_state, dtype=float)
    n, m = model.n_components, grid.size
    if base_state.shape != (n, m):
        raise ValueError(f"base_state must have shape {(n, m)}, got {base_state.shape}")
    if not np.all(np.isfinite(base_state)):
        raise ValueError("base_state contains NaN or inf")
    a, b = bc
    if b == 0:
        raise NotImplementedError("pure Dirichlet closure is not supported; need b != 0")
    if form not in ("conjugated", "expanded"):
        raise ValueError(f"unknown form {form!r}")
    expanded = form == "expanded" and eta != 0.0
    beta = (eta - a / b) if expanded else -a / b
    ops = polar_operators(grid, beta)
    lap = ops["Drr"] + ops["inv_r"] @ ops["Dr"] + ops["inv_r2"] @ ops["Dtt"] + ops["origin_lap"]
    if expanded:
        ring = np.ones(m)
        ring[0] = 0.0
        extra = sp.diags(eta**2 * ring) - eta * ops["inv_r"] - 2 * eta * ops["Dr"]
        lap = lap + extra
    J = model.f_u(base_state)
    blocks = [[None] * n for _ in range(n)]
    for c in range(n):
        for d in range(n):
            blk = sp.diags(np.asarray(J[c, d], dtype=float) * np.ones(m))
            if c == d:
                blk = blk + model.diffusion[c] * lap + omega * ops["Dt"]
            blocks[c][d] = blk
    A = sp.bmat(blocks, format="csr").astype(complex)
    if form == "conjugated" and eta != 0.0:
        A = conjugate_by_weight(A, eta * np.tile(grid.node_r, n))
    return SparseOperator(
        A,
        ordering=grid.band_ordering(n),
        meta={"grid": grid, "eta": eta, "omega": omega, "bc": bc, "form": form},
    )

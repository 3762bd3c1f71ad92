"""Rigidly rotating spirals on a disk and the spectra of their linearization.

The pipeline is: time-evolve a broken wave into a rotating pattern
(:func:`bootstrap_time_evolution`), polish it with Newton in the co-rotating
frame (:func:`solve_spiral`), then analyse the weighted linearization
``e^{ηr} L_R e^{-ηr}`` (:func:`linearization`, :func:`spiral_spectrum`,
:func:`pseudospectrum_field`, :func:`condition_map`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline

from .discretize import PolarGrid, SparseOperator, assemble_system_operator, polar_operators
from .kinetics import ReactionModel
from .linalg import (
    ConditionReport,
    EigenResult,
    SingularFactorError,
    condest_1norm,
    eigs_shift_invert,
    lu_factor,
    min_singular_value,
)

log = logging.getLogger(__name__)

__all__ = [
    "SpiralSolution",
    "SpectrumReport",
    "PseudospectrumField",
    "SpiralNewtonError",
    "steady_residual",
    "bootstrap_time_evolution",
    "solve_spiral",
    "interpolate_spiral",
    "linearization",
    "spiral_spectrum",
    "pseudospectrum_field",
    "condition_map",
    "far_field_wavenumber",
    "far_field_wavetrain",
    "far_field_correlation",
]


class SpiralNewtonError(RuntimeError):
    pass


@dataclass
class SpiralSolution:
    model: ReactionModel
    grid: PolarGrid
    omega: float
    profile: np.ndarray
    bc: tuple[float, float] = (0.0, 1.0)
    residual: float = float("nan")
    k_R: float = float("nan")
    iterations: int = 0

    def rotated(self, cells: int = 1) -> "SpiralSolution":
        return replace(self, profile=self.grid.rotate(self.profile, cells))

    def angular_derivative(self) -> np.ndarray:
        Dt = polar_operators(self.grid)["Dt"]
        return np.array([Dt @ p for p in self.profile])


@dataclass
class SpectrumReport:
    eta: float
    eigen: EigenResult
    dist_abs: np.ndarray
    dist_fb: np.ndarray
    R: float
    zero_index: int | None = None
    zero_correlation: float = float("nan")

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigen.eigenvalues

    @property
    def residuals(self) -> np.ndarray:
        return self.eigen.residuals


@dataclass
class PseudospectrumField:
    re: np.ndarray
    im: np.ndarray
    sigma_min: np.ndarray
    eta: float
    log10_kappa: np.ndarray | None = None
    contours: dict = field(default_factory=dict)

    @property
    def lambdas(self) -> np.ndarray:
        return self.re[None, :] + 1j * self.im[:, None]


# ---------------------------------------------------------------------------
# steady problem


def _laplacian(grid: PolarGrid, beta: float, ops=None):
    ops = polar_operators(grid, beta) if ops is None else ops
    return (ops["Drr"] + ops["inv_r"] @ ops["Dr"] + ops["inv_r2"] @ ops["Dtt"]
            + ops["origin_lap"]).tocsr(), ops


def steady_residual(model, grid, profile, omega, bc=(0.0, 1.0)) -> np.ndarray:
    """``D Δu + ω u_θ + f(u)`` at every node (boundary closure folded in)."""
    a, b = bc
    lap, ops = _laplacian(grid, -a / b)
    out = model.f(profile)
    for c in range(model.n_components):
        out[c] = out[c] + model.diffusion[c] * (lap @ profile[c]) + omega * (ops["Dt"] @ profile[c])
    return out


def _mode1_phase(grid: PolarGrid, values: np.ndarray, ring: int) -> complex:
    return np.fft.fft(values[grid.ring_slice(ring)])[1]


def far_field_wavenumber(grid: PolarGrid, u: np.ndarray, r_lo: float, r_hi: float) -> float:
    """Slope in ``r`` of the angular mode-1 phase, ``u ≈ U(kr + θ + const)``."""
    rings = [i for i in range(1, grid.N_r) if r_lo <= grid.r[i] <= r_hi]
    ph = np.unwrap([np.angle(_mode1_phase(grid, u, i)) for i in rings])
    return float(np.polyfit(grid.r[rings], ph, 1)[0])


def bootstrap_time_evolution(
    model: ReactionModel,
    grid: PolarGrid,
    t_end: float = 120.0,
    dt: float = 0.01,
    probe_r: float | None = None,
    initial: np.ndarray | None = None,
    return_history: bool = False,
    clip: tuple[float, float] | None = (0.0, 1.0),
):
    """Semi-implicit time stepping from a broken-wave initial condition.

    Diffusion is implicit with one banded factorization per component and
    the reaction explicit.  Returns ``(profile, omega, fit_r2)`` where ω is
    fitted to the drift of the angular mode-1 phase on the probe ring over
    the last quarter of the run.  ``clip`` bounds the first component after
    every step (pass ``None`` to disable).
    """
    n, m = model.n_components, grid.size
    x, y = grid.xy
    if initial is None:
        u = np.zeros((n, m))
        u[0] = np.where(y < 0, 1.0, 0.0)
        if n > 1:
            vmax = model.params.get("a", 1.0) / 2
            u[1] = np.where(x > 0, vmax, 0.0)
    else:
        u = np.array(initial, dtype=float)
    lap, _ = _laplacian(grid, 0.0)
    eye = sp.identity(m, format="csr")
    facs = [lu_factor(eye - dt * model.diffusion[c] * lap, ordering=grid.band_ordering(1))
            for c in range(n)]
    steps = int(round(t_end / dt))
    probe_r = grid.R / 2 if probe_r is None else probe_r
    ring = max(1, min(grid.N_r - 1, int(round(probe_r / grid.h_r))))
    ts, phases, hist = [], [], []
    record_from = steps - steps // 4
    for s in range(1, steps + 1):
        rhs = u + dt * model.f(u)
        u = np.array([facs[c].solve(rhs[c]).real for c in range(n)])
        if clip is not None:
            # the scheme has no maximum principle; keep transients in range
            np.clip(u[0], clip[0], clip[1], out=u[0])
        if s >= record_from:
            ts.append(s * dt)
            phases.append(np.angle(_mode1_phase(grid, u[0], ring)))
        if return_history and s % max(1, steps // 50) == 0:
            hist.append(u.copy())
    if np.ptp(u[0]) < 1e-2:
        raise SpiralNewtonError(
            "pattern died out to the rest state; try more excitable parameters or a larger disk"
        )
    ts, ph = np.array(ts), np.unwrap(phases)
    coef = np.polyfit(ts, ph, 1)
    fit = np.polyval(coef, ts)
    r2 = 1 - np.sum((ph - fit) ** 2) / max(np.sum((ph - ph.mean()) ** 2), 1e-300)
    # rigid rotation u(r, θ - ωt): mode-1 phase decreases like -ωt
    omega = -coef[0]
    if return_history:
        return u, float(omega), float(r2), hist
    return u, float(omega), float(r2)


def _mirror(grid: PolarGrid, profile: np.ndarray) -> np.ndarray:
    rings = grid.to_rings(profile)
    rings = np.roll(rings[..., ::-1], 1, axis=-1)
    return grid.from_rings(profile[..., 0], rings)


def solve_spiral(
    model: ReactionModel,
    grid: PolarGrid,
    guess: np.ndarray,
    omega: float,
    bc: tuple[float, float] = (0.0, 1.0),
    tol: float = 1e-8,
    maxiter: int = 30,
    orient: bool = True,
) -> SpiralSolution:
    """Newton on ``D Δu + ω u_θ + f(u) = 0`` with unknowns ``(u, ω)``.

    The phase condition ``<∂θ guess, u - guess> = 0`` pins the rotation.  The
    bordered Jacobian is solved through a banded LU of ``L + γ e_j e_jᵀ``
    (nonsingular although ``L`` has the rotation mode in its kernel) and a
    2x2 correction.
    """
    n, m = model.n_components, grid.size
    u = np.array(guess, dtype=float).reshape(n, m)
    om = float(omega)
    if orient and om < 0:
        u, om = np.array([_mirror(grid, p) for p in u]), -om
    a, b = bc
    ops = polar_operators(grid, -a / b)
    Dt = ops["Dt"]
    ref = u.copy()
    ref_d = np.concatenate([Dt @ p for p in ref])
    F = steady_residual(model, grid, u, om, bc)
    res = np.abs(F).max()
    it = 0
    while res > tol:
        if it >= maxiter:
            raise SpiralNewtonError(f"spiral Newton did not converge in {maxiter} steps (residual {res:.2e})")
        Lop = assemble_system_operator(model, grid, u, om, 0.0, bc)
        L = Lop.matrix
        col = np.concatenate([Dt @ p for p in u])
        j = int(np.argmax(np.abs(col)))
        gamma = float(np.abs(L.diagonal()).max())
        K = L + sp.csr_matrix(([gamma], ([j], [j])), shape=L.shape)
        try:
            fac = lu_factor(SparseOperator(K, ordering=Lop.ordering))
        except SingularFactorError as exc:
            raise SpiralNewtonError(
                "bordered spiral Jacobian is singular; a symmetry is probably not pinned"
            ) from exc
        rhs_u = -F.reshape(-1)
        rhs_s = -(ref_d @ (u - ref).reshape(-1))
        y_f = fac.solve(rhs_u).real
        y_e = fac.solve(np.eye(1, n * m, j).ravel()).real
        y_b = fac.solve(col).real
        # unknowns (t, s): t = x_j, s = dω
        M2 = np.array([[1 - gamma * y_e[j], y_b[j]],
                       [gamma * (ref_d @ y_e), -(ref_d @ y_b)]])
        r2 = np.array([y_f[j], rhs_s - ref_d @ y_f])
        try:
            t, s = np.linalg.solve(M2, r2)
        except np.linalg.LinAlgError as exc:
            raise SpiralNewtonError("degenerate bordered system") from exc
        dx = y_f + gamma * t * y_e - s * y_b
        step = 1.0
        amax = np.abs(dx).max()
        if amax > 0.5:
            step = 0.5 / amax
        u = u + step * dx.reshape(n, m)
        om = om + step * s
        it += 1
        F = steady_residual(model, grid, u, om, bc)
        res = np.abs(F).max()
        log.info("spiral Newton %d: residual %.3e omega %.8f", it, res, om)
        if not np.isfinite(res):
            raise SpiralNewtonError("spiral Newton diverged")
    sol = SpiralSolution(model, grid, om, u, bc, float(res), iterations=it)
    try:
        sol.k_R = far_field_wavenumber(grid, u[0], 0.5 * grid.R, 0.85 * grid.R)
    except Exception:  # noqa: BLE001 - diagnostic only
        pass
    return sol


def far_field_wavetrain(sol: SpiralSolution, M: int = 128, r_frac: float = 0.8):
    """Wave train with the spiral's frequency, seeded by a far-field ring.

    On a far-field ring ``u(r, θ) ≈ u_wt(k r + θ)``, so the ring itself is a
    profile in the phase variable.  Newton at ``k_R`` is followed by a secant
    iteration on ``k`` until ``ω_nl(k) = ω_R``.
    """
    from .wavetrain import resample_profile, solve_wavetrain, wavetrain_for_frequency

    grid = sol.grid
    ring = max(1, int(round(r_frac * grid.R / grid.h_r)))
    prof = np.array([p[grid.ring_slice(ring)] for p in sol.profile])
    prof = resample_profile(prof, M)
    k = sol.k_R if np.isfinite(sol.k_R) else far_field_wavenumber(grid, sol.profile[0], 0.5 * grid.R, 0.85 * grid.R)
    wt = solve_wavetrain(sol.model, k, prof, sol.omega)
    return wavetrain_for_frequency(sol.model, sol.omega, wt)


def far_field_correlation(sol: SpiralSolution, wt, r_frac: float = 0.8) -> float:
    """Best shifted correlation of the rings ``r ≥ r_frac R`` with the wave-train profile."""
    from .wavetrain import resample_profile

    grid = sol.grid
    ref = resample_profile(wt.profile[0], grid.N_theta)[0]
    ref = ref - ref.mean()
    F = np.conj(np.fft.fft(ref))
    worst = 1.0
    for i in range(1, grid.N_r):
        if grid.r[i] < r_frac * grid.R:
            continue
        x = sol.profile[0][grid.ring_slice(i)]
        x = x - x.mean()
        cc = np.real(np.fft.ifft(np.fft.fft(x) * F))
        worst = min(worst, cc.max() / (np.linalg.norm(x) * np.linalg.norm(ref)))
    return float(worst)


def interpolate_spiral(sol: SpiralSolution, grid: PolarGrid, r_ref: float | None = None) -> np.ndarray:
    """Transfer a spiral profile to another polar grid.

    Angles are interpolated spectrally, radii with cubic splines.  Beyond the
    old radius the far field is continued as an Archimedean spiral
    ``u(r, θ) = u(r_ref, θ + k (r - r_ref))``.
    """
    old = sol.grid
    n = sol.model.n_components
    k = sol.k_R if np.isfinite(sol.k_R) else far_field_wavenumber(old, sol.profile[0], 0.5 * old.R, 0.85 * old.R)
    if r_ref is None:
        r_ref = old.R - min(3.0, 0.15 * old.R)
    out = np.zeros((n, grid.size))
    nt_old, nt = old.N_theta, grid.N_theta
    modes = np.fft.fftfreq(nt_old, 1.0 / nt_old)
    for c in range(n):
        rings = old.to_rings(sol.profile[c])  # (N_r-1, nt_old)
        coef = np.fft.fft(rings, axis=-1) / nt_old
        if nt_old % 2 == 0:
            coef[:, nt_old // 2] *= 0.0
        # evaluate on the new angles
        th = grid.theta
        E = np.exp(1j * np.outer(th, modes))  # (nt, nt_old)
        vals = np.real(coef @ E.T)  # (N_r-1, nt)
        r_old = np.concatenate([[0.0], old.r[1:]])
        vals = np.vstack([np.full(nt, sol.profile[c][0]), vals])
        spline = CubicSpline(r_old, vals, axis=0)
        r_new = grid.r[1:]
        inside = r_new <= old.R
        res_rings = np.empty((len(r_new), nt))
        res_rings[inside] = spline(r_new[inside])
        if np.any(~inside):
            base_ring = spline(r_ref)
            bcoef = np.fft.fft(base_ring) / nt
            bm = np.fft.fftfreq(nt, 1.0 / nt)
            for i in np.where(~inside)[0]:
                shift = k * (r_new[i] - r_ref)
                res_rings[i] = np.real(np.fft.ifft(bcoef * nt * np.exp(1j * bm * shift)))
        out[c] = grid.from_rings(sol.profile[c][0], res_rings)
    return out


# ---------------------------------------------------------------------------
# linearization and spectra


def linearization(spiral: SpiralSolution, eta: float = 0.0, form: str = "conjugated") -> SparseOperator:
    """Weighted linearization ``L_R^η`` about the spiral."""
    return assemble_system_operator(
        spiral.model, spiral.grid, spiral.profile, spiral.omega, eta, spiral.bc, form
    )


def _polyline_distance(points: np.ndarray, curve) -> np.ndarray:
    from .spatial import polyline_distance

    if curve is None:
        return np.full(len(points), np.nan)
    return polyline_distance(points, curve)


def spiral_spectrum(
    spiral: SpiralSolution,
    eta: float = 0.0,
    k: int = 400,
    shift: complex = 0.0,
    tol: float = 1e-10,
    sigma_abs=None,
    sigma_fb=None,
    form: str = "conjugated",
    ncv: int | None = None,
) -> SpectrumReport:
    """``k`` eigenvalues of ``L_R^η`` nearest ``shift`` with curve distances.

    The eigenvalue closest to zero is checked against the rotation mode: its
    eigenfunction is correlated with ``e^{ηr} ∂θ u_R``.
    """
    A = linearization(spiral, eta, form)
    eig = eigs_shift_invert(A, k=k, shift=shift, tol=tol, ncv=ncv)
    vals = eig.eigenvalues
    rep = SpectrumReport(
        eta=eta,
        eigen=eig,
        dist_abs=_polyline_distance(vals, sigma_abs),
        dist_fb=_polyline_distance(vals, sigma_fb),
        R=spiral.grid.R,
    )
    if eig.eigenvectors is not None and len(vals):
        i0 = int(np.argmin(np.abs(vals)))
        mode = spiral.angular_derivative().reshape(-1) * np.exp(eta * np.tile(spiral.grid.node_r, spiral.model.n_components))
        v = eig.eigenvectors[:, i0]
        corr = abs(np.vdot(mode, v)) / (np.linalg.norm(mode) * np.linalg.norm(v))
        rep.zero_index, rep.zero_correlation = i0, float(corr)
    return rep


def pseudospectrum_field(
    spiral_or_operator,
    eta: float = 0.0,
    window=(-2.0, 0.5, -1.0, 4.0),
    resolution=(81, 81),
    with_condition: bool = False,
    levels=None,
) -> PseudospectrumField:
    """σ_min(L_R^η - λ) on a rectangular λ-grid.

    ``window`` is ``(re_min, re_max, im_min, im_max)``.  Failures at single
    points are stored as NaN.
    """
    if isinstance(spiral_or_operator, SpiralSolution):
        A = linearization(spiral_or_operator, eta)
    else:
        A = spiral_or_operator
    re = np.linspace(window[0], window[1], resolution[0])
    im = np.linspace(window[2], window[3], resolution[1])
    smin = np.full((len(im), len(re)), np.nan)
    kap = np.full_like(smin, np.nan) if with_condition else None
    for a, y in enumerate(im):
        for b_, x in enumerate(re):
            lam = complex(x, y)
            try:
                fac = lu_factor(_shift(A, lam), ordering=getattr(A, "ordering", None))
            except SingularFactorError:
                smin[a, b_] = 0.0
                if with_condition:
                    kap[a, b_] = np.inf
                continue
            except Exception:  # noqa: BLE001 - record and continue
                log.warning("pseudospectrum point %s failed", lam, exc_info=True)
                continue
            smin[a, b_] = min_singular_value(A, lam, factor=fac).sigma_min
            if with_condition:
                kap[a, b_] = condest_1norm(A, lam, factor=fac).log10_kappa
    fieldobj = PseudospectrumField(re, im, smin, eta, kap)
    if levels is not None:
        from .export import contour_polylines

        with np.errstate(divide="ignore"):
            fieldobj.contours = contour_polylines(re, im, np.log10(smin), levels)
    return fieldobj


def _shift(A, lam):
    M = A.matrix if isinstance(A, SparseOperator) else sp.csr_matrix(A)
    return sp.csr_matrix(M - lam * sp.identity(M.shape[0], dtype=complex, format="csr"))


def condition_map(spiral: SpiralSolution, eta_list, lambda_list, seed: int = 0) -> list[dict]:
    """κ₁ and σ_min of ``L_R^η - λ`` for every ``(η, λ)`` pair.

    ``seed`` fixes the random test vectors of the 1-norm estimator.
    """
    rows = []
    for eta in eta_list:
        A = linearization(spiral, eta)
        for lam in lambda_list:
            lam = complex(lam)
            try:
                fac = lu_factor(_shift(A, lam), ordering=A.ordering)
            except SingularFactorError:
                rows.append({"eta": eta, "lambda": lam, "log10_kappa": np.nan,
                             "log10_sigma_min": np.nan, "singular": True})
                continue
            ck: ConditionReport = condest_1norm(A, lam, factor=fac, seed=seed)
            sv: ConditionReport = min_singular_value(A, lam, factor=fac)
            kap = ck.log10_kappa if np.isfinite(ck.log10_kappa) else np.nan
            rows.append({"eta": eta, "lambda": lam, "log10_kappa": kap,
                         "log10_sigma_min": sv.log10_sigma_min if sv.sigma_min > 0 else np.nan,
                         "singular": not np.isfinite(ck.log10_kappa)})
    return rows

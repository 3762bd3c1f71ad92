"""Periodic wave trains ``u_wt(kx - ωt)`` and their nonlinear dispersion relation.

Profiles live on ``M`` equispaced points of ``[0, 2π)`` and are differentiated
spectrally.  The steady equation in the comoving phase ``φ = kx - ωt`` is

    k² D u'' + ω u' + f(u) = 0,

solved by Newton with the translation symmetry removed by a phase condition.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .discretize import fourier_diff
from .kinetics import ReactionModel

log = logging.getLogger(__name__)

__all__ = [
    "WaveTrain",
    "DispersionCurve",
    "NewtonError",
    "EquilibriumError",
    "phase_condition",
    "wavetrain_residual",
    "solve_wavetrain",
    "simulate_wavetrain",
    "resample_profile",
    "dispersion_curve",
    "group_velocity",
    "wavetrain_for_frequency",
]


class NewtonError(RuntimeError):
    pass


class EquilibriumError(NewtonError):
    """Newton collapsed onto a spatially constant state."""


def _phi(M: int) -> np.ndarray:
    return 2 * np.pi * np.arange(M) / M


def _spectral_derivative(profile: np.ndarray, order: int = 1) -> np.ndarray:
    M = profile.shape[-1]
    m = np.fft.fftfreq(M, 1.0 / M)
    if order % 2:
        m[M // 2] = 0.0
    return np.real(np.fft.ifft((1j * m) ** order * np.fft.fft(profile, axis=-1), axis=-1))


@dataclass
class WaveTrain:
    model: ReactionModel
    k: float
    omega: float
    profile: np.ndarray
    residual: float = float("nan")
    iterations: int = 0

    @property
    def M(self) -> int:
        return self.profile.shape[1]

    @property
    def phi(self) -> np.ndarray:
        return _phi(self.M)

    def derivative(self, order: int = 1) -> np.ndarray:
        return _spectral_derivative(self.profile, order)

    def shifted(self, dphi: float) -> "WaveTrain":
        """Profile translated by ``dphi`` (spectral interpolation)."""
        m = np.fft.fftfreq(self.M, 1.0 / self.M)
        p = np.real(np.fft.ifft(np.fft.fft(self.profile, axis=-1) * np.exp(-1j * m * dphi), axis=-1))
        return replace(self, profile=p)

    def is_constant(self, tol: float = 1e-3) -> bool:
        return bool(np.all(np.ptp(self.profile, axis=1) <= tol))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "omega": self.omega,
            "residual": self.residual,
            "M": self.M,
            "profile": self.profile.tolist(),
        }


@dataclass
class DispersionCurve:
    k: np.ndarray
    omega: np.ndarray
    k_star: float
    group_velocity: float
    cg_error: float
    truncated: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)


def phase_condition(reference: np.ndarray, candidate: np.ndarray) -> float:
    """``<∂φ reference, candidate - reference>`` with trapezoid weights."""
    reference = np.atleast_2d(reference)
    candidate = np.atleast_2d(candidate)
    if reference.shape != candidate.shape:
        raise ValueError("reference and candidate must share a sampling")
    w = 2 * np.pi / reference.shape[-1]
    return float(w * np.sum(_spectral_derivative(reference) * (candidate - reference)))


def wavetrain_residual(model: ReactionModel, k: float, omega: float, profile: np.ndarray) -> np.ndarray:
    d = model.diffusion[:, None]
    return (k**2 * d * _spectral_derivative(profile, 2) + omega * _spectral_derivative(profile, 1)
            + model.f(profile))


def _jacobian(model, k, omega, profile, D1, D2):
    n, M = profile.shape
    J = np.zeros((n * M, n * M))
    fu = model.f_u(profile)
    for c in range(n):
        sl = slice(c * M, (c + 1) * M)
        J[sl, sl] = k**2 * model.diffusion[c] * D2 + omega * D1
        for d in range(n):
            J[sl, d * M:(d + 1) * M] += np.diag(fu[c, d])
    return J


def solve_wavetrain(
    model: ReactionModel,
    k: float,
    guess: np.ndarray,
    omega: float,
    tol: float = 1e-10,
    maxiter: int = 50,
) -> WaveTrain:
    """Newton for ``(u, ω)`` at fixed wavenumber ``k``.

    ``guess`` is an ``(n, M)`` profile; the phase condition pins
    ``<guess', u - guess> = 0``.
    """
    if k == 0:
        raise ValueError("wavenumber must be nonzero")
    guess = np.array(guess, dtype=float)
    n, M = guess.shape
    if n != model.n_components:
        raise ValueError(f"guess has {n} components, model expects {model.n_components}")
    D1, D2 = fourier_diff(M, 1), fourier_diff(M, 2)
    ref_d = _spectral_derivative(guess).reshape(-1) * (2 * np.pi / M)
    u, om = guess.copy(), float(omega)
    res = np.abs(wavetrain_residual(model, k, om, u)).max()
    it = 0
    while res > tol:
        if it >= maxiter:
            raise NewtonError(f"wave-train Newton did not converge in {maxiter} steps (residual {res:.2e})")
        F = np.concatenate([wavetrain_residual(model, k, om, u).reshape(-1),
                            [ref_d @ (u - guess).reshape(-1)]])
        J = np.zeros((n * M + 1, n * M + 1))
        J[:-1, :-1] = _jacobian(model, k, om, u, D1, D2)
        J[:-1, -1] = (D1 @ u.T).T.reshape(-1)
        J[-1, :-1] = ref_d
        try:
            dx = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise NewtonError("singular wave-train Jacobian") from exc
        # damp large steps; the full step is taken near convergence
        scale = min(1.0, 0.5 / max(np.abs(dx[:-1]).max(), 1e-300))
        u = u + scale * dx[:-1].reshape(n, M)
        om += scale * dx[-1]
        it += 1
        res = np.abs(wavetrain_residual(model, k, om, u)).max()
        if not np.all(np.isfinite(u)):
            raise NewtonError("wave-train Newton diverged")
    wt = WaveTrain(model, float(k), float(om), u, float(res), it)
    if wt.is_constant():
        raise EquilibriumError(
            f"Newton converged to a spatially constant state (equilibrium, not wave train) at k={k}"
        )
    return wt


def simulate_wavetrain(
    model: ReactionModel,
    k: float,
    M: int = 128,
    t_end: float = 60.0,
    dt: float = 2e-3,
    pulse: float = 0.1,
):
    """Time-evolve a single pulse on a ring of wavelength ``2π/k``.

    Returns ``(profile, omega_estimate)`` with the pulse oriented to travel
    towards increasing phase (ω > 0).  Diffusion is treated implicitly in
    Fourier space, the reaction explicitly.
    """
    phi = _phi(M)
    n = model.n_components
    u = np.zeros((n, M))
    u[0] = np.where(np.abs(phi - np.pi) < pulse * np.pi, 1.0, 0.0)
    if n > 1:
        # refractory tail on the left so the pulse travels right
        u[1] = np.where((phi < np.pi) & (phi > np.pi * (1 - 4 * pulse)), 0.5, 0.0)
    m = np.fft.fftfreq(M, 1.0 / M)
    decay = 1.0 / (1.0 + dt * k**2 * model.diffusion[:, None] * m[None, :] ** 2)
    steps = int(round(t_end / dt))
    marks = []
    for s in range(steps):
        u = np.real(np.fft.ifft(np.fft.fft(u + dt * model.f(u), axis=-1) * decay, axis=-1))
        if s >= steps - 2000 and s % 100 == 0:
            marks.append((s * dt, np.angle(np.fft.fft(u[0])[1])))
    if np.ptp(u[0]) < 1e-3:
        raise EquilibriumError("pulse decayed to the rest state; k too large or model not excitable")
    t, ang = np.array(marks).T
    # mode-1 phase of U(φ - ωt) rotates as -ωt
    omega = -np.polyfit(t, np.unwrap(ang), 1)[0]
    if omega < 0:
        u = u[:, ::-1]
        u = np.roll(u, 1, axis=-1)
        omega = -omega
    return u, float(omega)


def resample_profile(profile: np.ndarray, M: int) -> np.ndarray:
    """Spectral interpolation of a periodic profile onto ``M`` points."""
    profile = np.atleast_2d(profile)
    M0 = profile.shape[-1]
    c = np.fft.rfft(profile, axis=-1) / M0
    out = np.zeros(profile.shape[:-1] + (M // 2 + 1,), dtype=complex)
    keep = min(c.shape[-1], out.shape[-1])
    out[..., :keep] = c[..., :keep]
    if M < M0 and M % 2 == 0:
        out[..., -1] = out[..., -1].real
    if M > M0 and M0 % 2 == 0:
        # the Nyquist coefficient splits evenly between modes ±M0/2
        out[..., M0 // 2] *= 0.5
    return np.fft.irfft(out * M, n=M, axis=-1)


def group_velocity(wt: WaveTrain, dk: float = 1e-3, tol: float = 1e-11) -> tuple[float, float]:
    """``ω_nl'(k)`` by centered differences; returns ``(c_g, error_estimate)``.

    The error estimate is the difference between steps ``dk`` and ``dk/2``
    (the Richardson estimate of the ``dk/2`` value's error times 4/3).
    """

    def omega_at(kk):
        return solve_wavetrain(wt.model, kk, wt.profile, wt.omega, tol=tol).omega

    def secant(step):
        return (omega_at(wt.k + step) - omega_at(wt.k - step)) / (2 * step)

    c1, c2 = secant(dk), secant(dk / 2)
    return c2 + (c2 - c1) / 3, abs(c2 - c1)


def wavetrain_for_frequency(
    model: ReactionModel,
    omega: float,
    seed: WaveTrain,
    tol: float = 1e-12,
    maxiter: int = 30,
) -> WaveTrain:
    """Wave train with prescribed frequency: secant iteration on ``ω_nl(k) = omega``."""
    k0, w0 = seed.k, solve_wavetrain(model, seed.k, seed.profile, seed.omega).omega
    k1 = k0 + 1e-3
    wt = solve_wavetrain(model, k1, seed.profile, w0)
    w1 = wt.omega
    for _ in range(maxiter):
        if abs(w1 - omega) < tol:
            return wt
        if w1 == w0:
            raise NewtonError("flat dispersion relation; frequency cannot select k")
        k0, k1 = k1, k1 - (w1 - omega) * (k1 - k0) / (w1 - w0)
        w0 = w1
        wt = solve_wavetrain(model, k1, wt.profile, wt.omega, tol=1e-12)
        w1 = wt.omega
    raise NewtonError(f"no wave train with frequency {omega} near k={seed.k}")


def dispersion_curve(
    model: ReactionModel,
    k_range: tuple[float, float],
    seed: WaveTrain,
    ds: float = 0.02,
    max_steps: int = 400,
    dk: float = 1e-3,
) -> DispersionCurve:
    """Pseudo-arclength continuation of ``(u, ω, k)`` across ``k_range``.

    The branch is traced in both directions from ``seed.k``.  A turning point
    in ``k`` stops that direction and marks the curve as truncated.
    """
    n, M = seed.profile.shape
    D1, D2 = fourier_diff(M, 1), fourier_diff(M, 2)
    kmin, kmax = k_range
    truncated, notes = False, []

    def residual(x, ref_d, ref):
        u = x[:-2].reshape(n, M)
        om, kk = x[-2], x[-1]
        return np.concatenate([wavetrain_residual(model, kk, om, u).reshape(-1),
                               [ref_d @ (x[:-2] - ref)]])

    def jac(x, ref_d):
        u = x[:-2].reshape(n, M)
        om, kk = x[-2], x[-1]
        J = np.zeros((n * M + 1, n * M + 2))
        J[:-1, :-2] = _jacobian(model, kk, om, u, D1, D2)
        J[:-1, -2] = (D1 @ u.T).T.reshape(-1)
        J[:-1, -1] = (2 * kk * model.diffusion[:, None] * (D2 @ u.T).T).reshape(-1)
        J[-1, :-2] = ref_d
        return J

    def tangent(J, prev=None):
        # null vector of the (N-1) x N Jacobian
        _, _, vh = np.linalg.svd(J)
        t = vh[-1]
        if prev is not None and t @ prev < 0:
            t = -t
        return t / np.linalg.norm(t)

    branches = []
    for direction in (+1, -1):
        x = np.concatenate([seed.profile.reshape(-1), [seed.omega, seed.k]])
        ref = x[:-2].copy()
        ref_d = _spectral_derivative(seed.profile).reshape(-1) * (2 * np.pi / M)
        t = tangent(jac(x, ref_d))
        if np.sign(t[-1]) != direction:
            t = -t
        pts = []
        h = ds
        for _ in range(max_steps):
            xp = x + h * t
            y = xp.copy()
            ok = False
            for _ in range(15):
                F = np.concatenate([residual(y, ref_d, ref), [t @ (y - xp)]])
                if np.abs(F).max() < 1e-10:
                    ok = True
                    break
                J = np.vstack([jac(y, ref_d), t])
                y = y - np.linalg.solve(J, F)
            if not ok:
                h /= 2
                if h < 1e-6:
                    notes.append("continuation step collapsed")
                    truncated = True
                    break
                continue
            t_new = tangent(jac(y, ref_d), t)
            if np.sign(t_new[-1]) != np.sign(t[-1]):
                truncated = True
                notes.append(f"fold in k near k={y[-1]:.6g}")
                break
            x, t = y, t_new
            ref = x[:-2].copy()
            ref_d = _spectral_derivative(x[:-2].reshape(n, M)).reshape(-1) * (2 * np.pi / M)
            if np.ptp(x[:-2].reshape(n, M)[0]) < 1e-3:
                truncated = True
                notes.append("branch collapsed to a constant state")
                break
            if not (kmin <= x[-1] <= kmax):
                break
            pts.append((x[-1], x[-2]))
            h = min(ds, 1.5 * h)
        branches.append(pts)
    samples = sorted(branches[1] + [(seed.k, seed.omega)] + branches[0])
    ks = np.array([p[0] for p in samples])
    oms = np.array([p[1] for p in samples])
    cg, err = group_velocity(seed, dk)
    return DispersionCurve(ks, oms, seed.k, cg, err, truncated, "; ".join(notes))

"""Spatial eigenvalues of wave trains, spectral gaps and the curves Σ_FB, Σ_abs.

A perturbation ``e^{λt + νr} w(φ)`` of a wave train solves the quadratic
Bloch problem ``L_B(ν) w = λ w`` with

    L_B(ν) = D (ν + k∂φ)² + ω∂φ + f_u(u_wt) = P0 + ν P1 + ν² P2.

For fixed λ its roots ν are the eigenvalues of the first-order operator
``A_wt(λ)``.  They are labelled by position in real-part order, calibrated at a
real anchor λ to the right of all Fredholm curves where the roots split into
``Re ν < 0`` (labels ≤ -1) and ``Re ν > 0`` (labels ≥ 0).  The gap
``J₀(λ) = (-Re ν₀, -Re ν₋₁)`` holds the admissible exponential weights.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .discretize import fourier_diff
from .wavetrain import EquilibriumError, NewtonError, WaveTrain, group_velocity

log = logging.getLogger(__name__)

__all__ = [
    "BlochFamily",
    "SpatialSpectrum",
    "WeightPlan",
    "SpectralCurve",
    "LabelTrackingError",
    "TrackedPath",
    "AdmissibilityReport",
    "assemble_awt",
    "awt_reference_vector",
    "spatial_spectrum",
    "track_labels",
    "spectral_gap",
    "select_weight",
    "fredholm_curves",
    "absolute_spectrum_trace",
    "absolute_spectrum",
    "find_branch_points",
    "check_admissibility",
    "polyline_distance",
    "hausdorff_distance",
]

GAP_TOL = 1e-10


# ---------------------------------------------------------------------------
# the Bloch family


@dataclass
class BlochFamily:
    """Quadratic matrix polynomial ``L_B(ν) = P0 + ν P1 + ν² P2``.

    ``omega`` and ``k`` record the vertical period ``iω`` of the Bloch curves
    (``spec L_B(ν + ik) = spec L_B(ν) - iω``); both are ``None`` when the
    family has no such structure.
    """

    P0: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    omega: float | None = None
    k: float | None = None
    anchor: float = 1.0
    source: WaveTrain | None = field(default=None, repr=False)
    _split: int | None = field(default=None, repr=False)

    @classmethod
    def from_wavetrain(cls, wt: WaveTrain, anchor: float = 1.0) -> "BlochFamily":
        """Bloch family on the ``M - 1`` symmetric Fourier modes of the profile grid.

        The Nyquist mode is dropped: the spectral first derivative vanishes on
        it, so it would carry no drift and produce spurious roots near the
        imaginary axis that do not respect ``ν → ν + ik``.
        """
        n, M = wt.profile.shape
        V = _mode_basis(M)
        modes = np.arange(-M // 2 + 1, M // 2)
        fu = wt.model.f_u(wt.profile)
        N = n * (M - 1)
        P0 = np.zeros((N, N), complex)
        P1 = np.zeros_like(P0)
        P2 = np.zeros_like(P0)
        ikm = 1j * wt.k * modes
        for c in range(n):
            sl = slice(c * (M - 1), (c + 1) * (M - 1))
            d = wt.model.diffusion[c]
            P0[sl, sl] = np.diag(d * ikm**2 + 1j * wt.omega * modes)
            P1[sl, sl] = np.diag(2 * d * ikm)
            P2[sl, sl] = d * np.eye(M - 1)
            for e in range(n):
                P0[sl, e * (M - 1):(e + 1) * (M - 1)] += V.conj().T @ (fu[c, e][:, None] * V)
        return cls(P0, P1, P2, omega=wt.omega, k=wt.k, anchor=anchor, source=wt)

    def coarsened(self, M: int = 64) -> "BlochFamily":
        """Family of the same wave train on ``M`` Fourier points (scans and checks)."""
        if self.source is None or self.source.M <= M:
            return self
        from .wavetrain import resample_profile

        wt = replace(self.source, profile=resample_profile(self.source.profile, M))
        return BlochFamily.from_wavetrain(wt, self.anchor)

    @classmethod
    def scalar(cls, c0: float, c1: float, c2: float = 1.0, anchor: float = 1.0) -> "BlochFamily":
        """Scalar family ``λ = c0 + c1 ν + c2 ν²`` (e.g. convection-diffusion)."""
        return cls(np.array([[c0]], float), np.array([[c1]], float), np.array([[c2]], float),
                   anchor=anchor)

    @property
    def size(self) -> int:
        return self.P0.shape[0]

    def bloch(self, nu: complex) -> np.ndarray:
        return self.P0 + nu * self.P1 + nu**2 * self.P2

    def dbloch(self, nu: complex) -> np.ndarray:
        return self.P1 + 2 * nu * self.P2

    def companion(self, lam: complex) -> np.ndarray:
        """First-order operator in ``(w, ν w)`` with the roots ν as eigenvalues."""
        m = self.size
        P2inv = np.linalg.inv(self.P2)
        top = np.hstack([np.zeros((m, m)), np.eye(m)])
        bot = np.hstack([-P2inv @ (self.P0 - lam * np.eye(m)), -P2inv @ self.P1])
        return np.vstack([top, bot]).astype(complex)

    def roots(self, lam: complex) -> np.ndarray:
        return np.linalg.eigvals(self.companion(lam))

    @property
    def split(self) -> int:
        """Number of roots with negative real part at the anchor."""
        if self._split is None:
            nus = self.roots(self.anchor)
            if np.min(np.abs(nus.real)) < 1e-8:
                raise ValueError(
                    f"anchor λ={self.anchor} has a root on the imaginary axis; choose a larger anchor"
                )
            self._split = int(np.sum(nus.real < 0))
        return self._split


def _mode_basis(M: int) -> np.ndarray:
    """Orthonormal columns ``e^{imφ_j}/√M`` for ``|m| < M/2``."""
    phi = 2 * np.pi * np.arange(M) / M
    modes = np.arange(-M // 2 + 1, M // 2)
    return np.exp(1j * np.outer(phi, modes)) / np.sqrt(M)


def _family(obj) -> BlochFamily:
    if isinstance(obj, BlochFamily):
        return obj
    if isinstance(obj, WaveTrain):
        return BlochFamily.from_wavetrain(obj)
    raise TypeError(f"expected a WaveTrain or BlochFamily, got {type(obj).__name__}")


# ---------------------------------------------------------------------------
# spatial spectra and labels


def assemble_awt(wt: WaveTrain, lam: complex, eta: float = 0.0) -> np.ndarray:
    """``A_wt(λ) + η I`` in the variables ``(u, (∂r + k∂φ) u)``.

    Both halves are expanded in the ``M - 1`` symmetric Fourier modes (see
    :meth:`BlochFamily.from_wavetrain`).
    """
    fam = BlochFamily.from_wavetrain(wt)
    N = fam.size
    Dinv = np.linalg.inv(fam.P2)
    kD = 0.5 * Dinv @ fam.P1  # k ∂φ, diagonal in modes
    # P0 = D (k∂φ)² + ω∂φ + f_u
    B = Dinv @ (fam.P0 - fam.P2 @ kD @ kD - lam * np.eye(N))
    A = np.block([[-kD, np.eye(N)], [-B, -kD]])
    if eta:
        A = A + eta * np.eye(2 * N)
    return A


def awt_reference_vector(wt: WaveTrain) -> np.ndarray:
    """``(u', k u'')`` of the profile in the mode basis used by :func:`assemble_awt`."""
    V = _mode_basis(wt.M)
    n = wt.model.n_components
    parts = [V.conj().T @ wt.derivative(1)[c] for c in range(n)]
    parts += [wt.k * (V.conj().T @ wt.derivative(2)[c]) for c in range(n)]
    return np.concatenate(parts)


@dataclass
class SpatialSpectrum:
    lam: complex
    nus: np.ndarray
    labels: np.ndarray
    n_total: int
    eta: float = 0.0

    def nu(self, label: int) -> complex:
        idx = np.nonzero(self.labels == label)[0]
        if not len(idx):
            raise KeyError(f"label {label} not retained")
        return complex(self.nus[idx[0]])

    @property
    def nu_m1(self) -> complex:
        return self.nu(-1)

    @property
    def nu_0(self) -> complex:
        return self.nu(0)


def _sorted_roots(fam: BlochFamily, lam: complex) -> np.ndarray:
    nus = fam.roots(lam)
    return nus[np.lexsort((nus.imag, nus.real))]


def spatial_spectrum(wt, lam: complex, n_keep: int = 20, eta: float = 0.0) -> SpatialSpectrum:
    """Spatial eigenvalues at ``λ`` sorted by real part with position labels.

    ``2 n_keep`` roots centered on the ``ν₋₁``/``ν₀`` pair are returned; the
    remaining ones sit far from the imaginary axis and carry the Fourier
    truncation error.
    """
    fam = _family(wt)
    nus = _sorted_roots(fam, lam) + eta
    p = fam.split - 1
    lo, hi = max(0, p - n_keep + 1), min(len(nus), p + n_keep + 1)
    idx = np.arange(lo, hi)
    return SpatialSpectrum(complex(lam), nus[idx], idx - p - 1, len(nus), eta)


class LabelTrackingError(RuntimeError):
    def __init__(self, message, segment=None):
        super().__init__(message)
        self.segment = segment


@dataclass
class TrackedPath:
    lambdas: np.ndarray
    nu_m1: np.ndarray
    nu_0: np.ndarray
    sorted_agree: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return np.stack([-self.nu_0.real, -self.nu_m1.real], axis=1)


def track_labels(
    wt,
    path,
    max_step: float = 0.02,
    min_step: float = 1e-6,
    from_anchor: bool = True,
) -> TrackedPath:
    """Continue the labels ``ν₋₁, ν₀`` along a polyline in the λ-plane.

    With ``from_anchor`` the walk starts at ``anchor + i Im(path[0])``, where
    position labels are valid, and reaches ``path[0]`` horizontally.  Each
    step matches the tracked pair to the nearest roots; a step is bisected
    while a match is ambiguous.  ``sorted_agree`` flags the recorded points at
    which tracked and position labels coincide (they differ after the path
    crosses Σ_abs).
    """
    fam = _family(wt)
    path = np.atleast_1d(np.asarray(path, dtype=complex))
    nodes = list(path)
    if from_anchor:
        nodes = [complex(max(fam.anchor, path[0].real), path[0].imag)] + nodes
    p = fam.split - 1

    def pair_at(lam):
        s = _sorted_roots(fam, lam)
        return s, s[p], s[p + 1]

    roots, a, b = pair_at(nodes[0])
    out_l, out_a, out_b, agree = [], [], [], []
    start = 1 if from_anchor else 0
    if not from_anchor:
        out_l.append(nodes[0]); out_a.append(a); out_b.append(b); agree.append(True)
    lam = nodes[0]
    for i, target in enumerate(nodes[1:], 1):
        while abs(target - lam) > 1e-15:
            step = min(max_step, abs(target - lam))
            while True:
                nxt = lam + step * (target - lam) / abs(target - lam)
                s = _sorted_roots(fam, nxt)
                da, db = np.abs(s - a), np.abs(s - b)
                ia, ib = int(np.argmin(da)), int(np.argmin(db))
                sa, sb = np.partition(da, 1)[:2], np.partition(db, 1)[:2]
                ok = ia != ib and sa[0] < 0.5 * sa[1] and sb[0] < 0.5 * sb[1]
                if ok:
                    break
                step /= 2
                if step < min_step:
                    raise LabelTrackingError(
                        f"labels collide near λ={nxt:.6g}; the path meets Σ_abs",
                        segment=(nodes[i - 1], target),
                    )
            lam, a, b = nxt, s[ia], s[ib]
        if i >= start:
            s = _sorted_roots(fam, lam)
            out_l.append(lam); out_a.append(a); out_b.append(b)
            agree.append(bool(np.isclose(a, s[p]) and np.isclose(b, s[p + 1])))
    return TrackedPath(np.array(out_l), np.array(out_a), np.array(out_b), np.array(agree))


# ---------------------------------------------------------------------------
# gaps and weights


@dataclass
class WeightPlan:
    lam: complex
    J0: tuple[float, float] | None
    eta: float | None = None
    policy: str = ""
    inside: bool | None = None

    @property
    def empty(self) -> bool:
        return self.J0 is None

    @property
    def center(self) -> float:
        if self.J0 is None:
            raise ValueError(f"λ={self.lam} lies on Σ_abs: the gap is empty")
        return 0.5 * (self.J0[0] + self.J0[1])


def spectral_gap(spectrum: SpatialSpectrum) -> WeightPlan:
    """``J₀ = (-Re ν₀, -Re ν₋₁)`` (shifted back when the spectrum carries a weight)."""
    lo = -(spectrum.nu_0.real - spectrum.eta)
    hi = -(spectrum.nu_m1.real - spectrum.eta)
    gap = (lo, hi) if hi - lo > GAP_TOL else None
    return WeightPlan(spectrum.lam, gap)


def select_weight(plan, policy="midpoint", theta: float = 0.9) -> WeightPlan:
    """Choose ``η`` in ``J₀(λ)``.

    ``policy`` is ``"midpoint"``, ``("fixed", η)`` or ``("safety", η_target)``.
    The safety policy moves a target into the shrunk gap
    ``center ± θ·halfwidth``; ``fixed`` keeps η and warns when it falls
    outside the gap.
    """
    if isinstance(plan, SpatialSpectrum):
        plan = spectral_gap(plan)
    name = policy if isinstance(policy, str) else policy[0]
    if name == "midpoint":
        eta = plan.center
        return WeightPlan(plan.lam, plan.J0, eta, "midpoint", plan.J0 is not None)
    if name == "fixed":
        eta = float(policy[1])
        inside = plan.J0 is not None and plan.J0[0] < eta < plan.J0[1]
        if not inside:
            warnings.warn(f"η={eta} is outside J₀({plan.lam:.4g}) = {plan.J0}", RuntimeWarning,
                          stacklevel=2)
        return WeightPlan(plan.lam, plan.J0, eta, "fixed", inside)
    if name == "safety":
        if not 0 < theta < 1:
            raise ValueError(f"safety fraction must be in (0, 1), got {theta}")
        target = float(policy[1]) if len(policy) > 1 else plan.center
        c = plan.center
        half = theta * 0.5 * (plan.J0[1] - plan.J0[0])
        eta = float(np.clip(target, c - half, c + half))
        return WeightPlan(plan.lam, plan.J0, eta, "safety", True)
    raise ValueError(f"unknown weight policy {policy!r}")


# ---------------------------------------------------------------------------
# curves


def polyline_distance(points, curve) -> np.ndarray:
    """Distance of each point to a polyline (NaN entries split the polyline)."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if isinstance(curve, SpectralCurve):
        curve = curve.points
    c = np.asarray(curve, dtype=complex)
    a, b = c[:-1], c[1:]
    keep = np.isfinite(a) & np.isfinite(b)
    a, b = a[keep], b[keep]
    if not len(a):
        iso = c[np.isfinite(c)]
        return np.abs(pts[:, None] - iso[None]).min(axis=1)
    d = b - a
    L2 = np.maximum(np.abs(d) ** 2, 1e-300)
    out = np.empty(len(pts))
    for s in range(0, len(pts), 256):
        q = pts[s:s + 256, None]
        t = np.clip(((q - a[None]) * np.conj(d[None])).real / L2[None], 0.0, 1.0)
        out[s:s + 256] = np.abs(q - (a[None] + t * d[None])).min(axis=1)
    return out


def _in_window(z, window):
    if window is None:
        return np.isfinite(z)
    x0, x1, y0, y1 = window
    return np.isfinite(z) & (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)


def hausdorff_distance(a, b, window=None) -> float:
    """Symmetric Hausdorff distance of two polylines, restricted to ``window``."""
    pa = a.points if isinstance(a, SpectralCurve) else np.asarray(a, complex)
    pb = b.points if isinstance(b, SpectralCurve) else np.asarray(b, complex)
    qa, qb = pa[_in_window(pa, window)], pb[_in_window(pb, window)]
    if not len(qa) or not len(qb):
        return np.inf
    return float(max(polyline_distance(qa, pb).max(), polyline_distance(qb, pa).max()))


@dataclass
class SpectralCurve:
    kind: str
    points: np.ndarray
    param: np.ndarray
    branch: np.ndarray
    meta: dict = field(default_factory=dict)

    def distance(self, lam) -> np.ndarray:
        return polyline_distance(lam, self.points)

    def shifted(self, dz: complex) -> "SpectralCurve":
        return SpectralCurve(self.kind, self.points + dz, self.param, self.branch, dict(self.meta))

    def periodic_copies(self, im_range: tuple[float, float]) -> "SpectralCurve":
        """Union of the vertical copies ``λ + i m ω`` meeting ``im_range``."""
        om = self.meta.get("omega")
        if not om:
            return self
        pts = self.points[np.isfinite(self.points)]
        lo = int(np.floor((im_range[0] - pts.imag.max()) / om)) - 1
        hi = int(np.ceil((im_range[1] - pts.imag.min()) / om)) + 1
        parts = [self.shifted(1j * om * m) for m in range(lo, hi + 1)]
        return concat_curves(parts, self.kind, meta=dict(self.meta))

    def to_rows(self):
        for z, g, br in zip(self.points, self.param, self.branch):
            if np.isfinite(z):
                yield {"kind": self.kind, "branch": int(br), "param": float(g),
                       "re": float(z.real), "im": float(z.imag)}


def concat_curves(curves, kind, meta=None) -> SpectralCurve:
    pts, par, br = [], [], []
    base = 0
    for c in curves:
        pts += [c.points, [np.nan]]
        par += [c.param, [np.nan]]
        br += [c.branch + base, [-1]]
        base += int(c.branch.max()) + 1 if len(c.branch) else 0
    if not pts:
        return SpectralCurve(kind, np.array([], complex), np.array([]), np.array([], int), meta or {})
    return SpectralCurve(kind, np.concatenate(pts).astype(complex), np.concatenate(par),
                         np.concatenate(br).astype(int), meta or {})


def fredholm_curves(
    wt,
    eta: float = 0.0,
    gamma_grid=None,
    branch_count: int = 8,
    max_jump: float = 0.05,
    max_refine: int = 8,
) -> SpectralCurve:
    """Curves ``λ_j(γ)`` of Bloch eigenvalues at ``ν = -η + iγ``.

    The ``branch_count`` rightmost eigenvalues are followed in γ by optimal
    matching; a jump larger than ``max_jump`` triggers γ refinement, and
    branches are split where refinement does not remove the jump (a
    reordering of the rightmost set).
    """
    fam = _family(wt)
    if gamma_grid is None:
        k = fam.k if fam.k else 1.0
        gamma_grid = np.linspace(-k / 2, k / 2, 201)
    gamma_grid = np.asarray(gamma_grid, float)

    def rightmost(g):
        ev = np.linalg.eigvals(fam.bloch(-eta + 1j * g))
        return ev[np.argsort(-ev.real)[:branch_count]]

    gs, vals = [gamma_grid[0]], [rightmost(gamma_grid[0])]
    breaks = []
    for g1 in gamma_grid[1:]:
        stack = [g1]
        depth = 0
        while stack:
            g = stack[-1]
            v = rightmost(g)
            prev = vals[-1]
            cost = np.abs(prev[:, None] - v[None, :])
            r, c = linear_sum_assignment(cost)
            jump = cost[r, c].max()
            if jump > max_jump and depth < max_refine and abs(g - gs[-1]) > 1e-9:
                stack.append(0.5 * (gs[-1] + g))
                depth += 1
                continue
            order = np.empty(len(v), int)
            order[r] = c
            v = v[order]
            if jump > max_jump:
                breaks.append(len(gs))
            gs.append(g)
            vals.append(v)
            stack.pop()
            depth = max(0, depth - 1)
    gs, V = np.array(gs), np.array(vals)  # (n_gamma, branch_count)
    pts, par, br = [], [], []
    cuts = [0] + breaks + [len(gs)]
    bid = 0
    for j in range(V.shape[1]):
        for s, e in zip(cuts[:-1], cuts[1:]):
            pts += [V[s:e, j], [np.nan]]
            par += [gs[s:e], [np.nan]]
            br += [np.full(e - s, bid), [-1]]
            bid += 1
    meta = {"eta": eta, "omega": fam.omega, "k": fam.k}
    return SpectralCurve("fredholm_boundary", np.concatenate(pts).astype(complex),
                         np.concatenate(par), np.concatenate(br).astype(int), meta)


# ---------------------------------------------------------------------------
# absolute spectrum


def _branch(fam: BlochFamily, nu: complex, target: complex):
    """Bloch eigenvalue of ``L_B(ν)`` closest to ``target`` and ``dλ/dν``."""
    w, vl, vr = sla.eig(fam.bloch(nu), left=True, right=True)
    i = int(np.argmin(np.abs(w - target)))
    x, y = vr[:, i], vl[:, i]
    d = np.vdot(y, fam.dbloch(nu) @ x) / np.vdot(y, x)
    return complex(w[i]), complex(d)


class _EigBranch:
    """One Bloch eigenvalue followed in ν by bordered Newton refinement.

    Falls back to a full eigendecomposition when refinement fails or lands
    on a different eigenvector.
    """

    def __init__(self, fam: BlochFamily):
        self.fam = fam
        self.x = None

    def _full(self, nu, target):
        w, vr = np.linalg.eig(self.fam.bloch(nu))
        i = int(np.argmin(np.abs(w - target)))
        return complex(w[i]), vr[:, i] / np.linalg.norm(vr[:, i])

    def __call__(self, nu: complex, target: complex):
        A = self.fam.bloch(nu)
        n = A.shape[0]
        lam, x = None, None
        if self.x is not None:
            lam, x = complex(target), self.x.copy()
            c = x.conj()
            ok = False
            for _ in range(10):
                r = A @ x - lam * x
                if np.linalg.norm(r) < 1e-12 * max(1.0, np.abs(A).max()):
                    ok = True
                    break
                B = np.zeros((n + 1, n + 1), complex)
                B[:n, :n] = A - lam * np.eye(n)
                B[:n, n] = -x
                B[n, :n] = c
                rhs = np.concatenate([-r, [1.0 - c @ x]])
                try:
                    d = np.linalg.solve(B, rhs)
                except np.linalg.LinAlgError:
                    break
                x, lam = x + d[:n], lam + d[n]
            if not ok or abs(np.vdot(self.x, x)) < 0.7 * np.linalg.norm(x) or abs(lam - target) > 0.3:
                lam, x = None, None
        if lam is None:
            lam, x = self._full(nu, target)
        x = x / np.linalg.norm(x)
        # left eigenvector from the bordered adjoint system
        B = np.zeros((n + 1, n + 1), complex)
        B[:n, :n] = (A - lam * np.eye(n)).conj().T
        B[:n, n] = x
        B[n, :n] = x.conj()
        y = np.linalg.solve(B, np.eye(n + 1)[n])[:n]
        d = np.vdot(y, self.fam.dbloch(nu) @ x) / np.vdot(y, x)
        self.x = x
        return complex(lam), complex(d)


def find_branch_points(fam, nu_guesses, lam_guesses, tol: float = 1e-11, maxiter: int = 40):
    """Newton on ``dλ/dν = 0`` along Bloch eigenvalue branches.

    Returns a list of ``(ν_b, λ_b)``; the second derivative is taken by a
    complex central difference of ``dλ/dν``.
    """
    fam = _family(fam)
    out = []
    for nu, lam in zip(nu_guesses, lam_guesses):
        nu, lam = complex(nu), complex(lam)
        ok = False
        for _ in range(maxiter):
            lam, d = _branch(fam, nu, lam)
            if abs(d) < tol:
                ok = True
                break
            h = 1e-5
            _, dp = _branch(fam, nu + h, lam)
            _, dm = _branch(fam, nu - h, lam)
            dd = (dp - dm) / (2 * h)
            if dd == 0:
                break
            step = d / dd
            if abs(step) > 0.2:
                step *= 0.2 / abs(step)
            nu -= step
        if ok:
            out.append((nu, lam))
    return out


def _relevant(checker: BlochFamily, lam: complex, nu1: complex, nu2: complex, tol: float = 1e-4):
    """Whether ``(ν₁, ν₂)`` is the labelled pair ``ν₋₁, ν₀`` at λ.

    Returns ``(relevant, triple)``; ``triple`` flags a third root whose real
    part comes within ``tol`` of the pair.
    """
    s = _sorted_roots(checker, lam)
    p = checker.split - 1
    i1 = int(np.argmin(np.abs(s - nu1)))
    i2 = int(np.argmin(np.abs(s - nu2)))
    if {i1, i2} != {p, p + 1}:
        return False, False
    others = np.delete(s.real, [p, p + 1])
    gap = np.min(np.abs(others - 0.5 * (nu1 + nu2).real)) if len(others) else np.inf
    return True, bool(gap < tol)


def absolute_spectrum_trace(
    wt,
    seed,
    steps: int = 400,
    ds: float = 0.02,
    ds_max: float = 0.1,
    max_spacing: float = 0.05,
    window=None,
    tol: float = 1e-11,
    direction: int = 0,
) -> SpectralCurve:
    """Continue a piece of Σ_abs from ``seed``.

    The unknowns are the centre ``ν̄`` and separation ``Δ`` of a root pair
    ``ν₁,₂ = ν̄ ± iΔ/2`` with ``λ(ν₁) = λ(ν₂)`` on two Bloch branches, so that
    ``Re ν₁ = Re ν₂`` holds by construction; the curve is followed by
    pseudo-arclength in ``(Re ν̄, Im ν̄, Δ)``.  ``seed`` is a branch point
    ``(ν_b, λ_b)`` (the trace then starts at ``Δ = 0``) or a triple
    ``(λ, ν₁, ν₂)`` with ``Re ν₁ ≈ Re ν₂``.  ``direction=0`` traces both
    ways.  The trace stops on leaving ``window``, at ``Δ = 0``, where the
    pair stops being ``ν₋₁, ν₀``, or at a triple junction.
    """
    fam = _family(wt)
    checker = fam.coarsened()
    br = (_EigBranch(fam), _EigBranch(fam))
    if len(seed) == 2:
        nu_b, lam_b = complex(seed[0]), complex(seed[1])
        x0, lam0 = _offset_from_branch_point(br, nu_b, lam_b, ds, tol)
        dirs = [+1]
        head = [(lam_b, 0.0)]
    else:
        lam0, n1, n2 = (complex(v) for v in seed)
        if n1.imag < n2.imag:
            n1, n2 = n2, n1
        x0 = np.array([0.5 * (n1 + n2).real, 0.5 * (n1 + n2).imag, (n1 - n2).imag])
        x0, lam0 = _correct(br, x0, lam0, None, None, tol)
        dirs = [+1, -1] if direction == 0 else [direction]
        head = []
    start_vecs = [b.x for b in br]
    pieces = []
    for sgn in dirs:
        for b, v in zip(br, start_vecs):
            b.x = v
        pts, par = [lam0], [x0[2]]
        x, lam = x0.copy(), lam0
        t = _tangent(br, x, lam)
        if t[2] * sgn < 0:
            t = -t
        h = ds
        stop = "steps"
        for _ in range(steps):
            xp = x + h * t
            try:
                xn, ln = _correct(br, xp, lam, t, xp, tol)
            except RuntimeError:
                xn = None
            if xn is None or abs(ln - lam) > max_spacing:
                h /= 2
                if h < 1e-7:
                    stop = "step collapse"
                    break
                continue
            if xn[2] < 0:
                stop = "branch point"
                break
            tn = _tangent(br, xn, ln)
            if tn @ t < 0:
                tn = -tn
            x, lam, t = xn, ln, tn
            nu1 = complex(x[0], x[1] + x[2] / 2)
            nu2 = complex(x[0], x[1] - x[2] / 2)
            rel, triple = _relevant(checker, lam, nu1, nu2)
            if not rel:
                stop = "pair not relevant"
                break
            pts.append(lam)
            par.append(x[2])
            if triple:
                stop = "triple junction"
                log.warning("Σ_abs trace halted at a triple junction near λ=%s", lam)
                break
            if window is not None and not _in_window(np.array([lam]), window)[0]:
                stop = "left window"
                break
            h = min(ds_max, 1.3 * h)
        pieces.append((pts, par, stop))
    if len(pieces) == 2:
        (p1, q1, s1), (p2, q2, s2) = pieces
        pts, par, stops = p2[::-1] + p1[1:], q2[::-1] + q1[1:], (s2, s1)
    else:
        pts, par, s = pieces[0]
        if head:
            pts, par = [head[0][0]] + pts, [0.0] + par
        stops = (s,)
    meta = {"omega": fam.omega, "k": fam.k, "stops": stops}
    return SpectralCurve("absolute_spectrum", np.array(pts, complex), np.array(par),
                         np.zeros(len(pts), int), meta)


def _pair_values(br, x, lam_guess):
    nu1 = complex(x[0], x[1] + x[2] / 2)
    nu2 = complex(x[0], x[1] - x[2] / 2)
    l1, d1 = br[0](nu1, lam_guess)
    l2, d2 = br[1](nu2, lam_guess)
    return l1, d1, l2, d2


def _real_jac(d1, d2):
    z = d1 - d2
    w = 0.5j * (d1 + d2)
    return np.array([[z.real, -z.imag, w.real], [z.imag, z.real, w.imag]])


def _tangent(br, x, lam):
    _, d1, _, d2 = _pair_values(br, x, lam)
    J = _real_jac(d1, d2)
    t = np.cross(J[0], J[1])
    return t / np.linalg.norm(t)


def _correct(br, x, lam, t, xp, tol, maxiter: int = 12):
    """Newton for ``λ(ν₁) = λ(ν₂)`` with the arclength row (or fixed Δ)."""
    x = np.array(x, float)
    saved = [b.x for b in br]
    for _ in range(maxiter):
        try:
            l1, d1, l2, d2 = _pair_values(br, x, lam)
        except np.linalg.LinAlgError:
            break
        G = l1 - l2
        lam = 0.5 * (l1 + l2)
        J = _real_jac(d1, d2)
        if t is None:
            F = np.array([G.real, G.imag])
            if np.abs(F).max() < tol:
                return x, l1
            dx = np.linalg.solve(J[:, :2], -F)
            x[:2] += dx
        else:
            F = np.array([G.real, G.imag, t @ (x - xp)])
            if np.abs(F[:2]).max() < tol:
                return x, l1
            dx = np.linalg.solve(np.vstack([J, t]), -F)
            x += dx
        if np.abs(dx).max() > 0.5:
            break
    for b, v in zip(br, saved):
        b.x = v
    raise RuntimeError("corrector did not converge")


def _offset_from_branch_point(br, nu_b, lam_b, ds, tol):
    """First point on Σ_abs next to a branch point.

    Near ``ν_b`` the branch is ``λ ≈ λ_b + a (ν - ν_b)²``, so ``λ(ν̄ + iΔ/2) =
    λ(ν̄ - iΔ/2)`` holds at ``ν̄ = ν_b`` for every small Δ; Newton then
    removes the cubic error.
    """
    x = np.array([nu_b.real, nu_b.imag, ds])
    return _correct(br, x, lam_b, None, None, tol)


def absolute_spectrum(
    wt,
    window=(-2.0, 0.5, -1.0, 4.0),
    n_re: int = 40,
    n_im: int = 40,
    ds: float = 0.02,
    steps: int = 600,
    max_pieces: int = 40,
) -> SpectralCurve:
    """Σ_abs inside ``window`` traced from seeds found by a λ-grid scan.

    ``g(λ) = Re ν₀ - Re ν₋₁`` vanishes exactly on Σ_abs.  Grid points where
    ``g`` is a local minimum along a row or a column and small compared with
    its neighbours become seeds; each seed is traced in both directions
    unless it already lies on a traced piece.  The scan uses the coarsened
    family, the trace the full one.
    """
    fam = _family(wt)
    coarse = fam.coarsened()
    x0, x1, y0, y1 = window
    xs, ys = np.linspace(x0, x1, n_re), np.linspace(y0, y1, n_im)
    hx, hy = xs[1] - xs[0], ys[1] - ys[0]
    p = coarse.split - 1
    G = np.empty((n_im, n_re))
    pairs = np.empty((n_im, n_re, 2), complex)
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            s = _sorted_roots(coarse, complex(x, y))
            G[i, j] = s[p + 1].real - s[p].real
            pairs[i, j] = s[p], s[p + 1]
    cand = []
    for i in range(n_im):
        for j in range(n_re):
            g = G[i, j]
            row = G[i, max(j - 1, 0):j + 2]
            col = G[max(i - 1, 0):i + 2, j]
            for nb, h in ((row, hx), (col, hy)):
                if len(nb) == 3 and g <= nb.min() and g < 0.5 * (nb.max() - g) + 1e-3:
                    cand.append((g, i, j))
                    break
    cand.sort()
    pieces = []
    for g, i, j in cand:
        if len(pieces) >= max_pieces:
            log.warning("Σ_abs scan stopped after %d pieces", max_pieces)
            break
        lam = complex(xs[j], ys[i])
        if pieces and min(c.distance([lam])[0] for c in pieces) < 1.5 * max(hx, hy):
            continue
        n1, n2 = pairs[i, j]
        try:
            cur = absolute_spectrum_trace(fam, (lam, n1, n2), steps=steps, ds=ds, window=window)
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            log.info("Σ_abs seed at %s failed: %s", lam, exc)
            continue
        if len(cur.points) < 2:
            continue
        pieces.append(cur)
    return concat_curves(pieces, "absolute_spectrum",
                         meta={"omega": fam.omega, "k": fam.k, "window": window})


# ---------------------------------------------------------------------------
# admissibility


@dataclass
class AdmissibilityReport:
    nu_zero: complex
    eigvec_error: float
    dnu_dlambda: complex
    group_velocity: float
    cg_error: float
    relative_mismatch: float
    ok: bool


def check_admissibility(wt: WaveTrain, tol_vec: float = 1e-6, tol_cg: float = 1e-3,
                        dk: float = 1e-3) -> AdmissibilityReport:
    """Translational root of ``A_wt(0)`` and ``dν_*/dλ(0) = -1/c_g``.

    The root derivative comes from first-order perturbation of ``A_wt(λ)``
    (left/right eigenvectors), the group velocity from the dispersion
    relation; the two are independent.
    """
    A = assemble_awt(wt, 0.0)
    w, vl, vr = sla.eig(A, left=True, right=True)
    i = int(np.argmin(np.abs(w)))
    x, y = vr[:, i], vl[:, i]
    ref = awt_reference_vector(wt)
    scale = np.vdot(x, ref) / np.vdot(x, x)
    nref = np.abs(ref).max()
    err = np.abs(x * scale - ref).max() / nref if nref > 0 else np.inf
    N = A.shape[0] // 2
    dA = np.zeros_like(A)
    dA[N:, :N] = np.linalg.inv(BlochFamily.from_wavetrain(wt).P2)
    dnu = np.vdot(y, dA @ x) / np.vdot(y, x)
    try:
        cg, cg_err = group_velocity(wt, dk=dk)
        mismatch = abs(dnu - (-1.0 / cg)) / abs(1.0 / cg)
    except (EquilibriumError, NewtonError):
        # no wave-train family through this state
        cg, cg_err, mismatch = np.nan, np.nan, np.inf
    return AdmissibilityReport(complex(w[i]), float(err), complex(dnu), float(cg), float(cg_err),
                               float(mismatch), bool(err <= tol_vec and mismatch <= tol_cg))

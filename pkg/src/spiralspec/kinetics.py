"""Reaction kinetics and diffusion matrices for reaction-diffusion systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ReactionModel",
    "BarkleyParams",
    "barkley_model",
    "jacobian",
    "fd_jacobian",
    "build_model",
    "MODEL_REGISTRY",
]


@dataclass(frozen=True)
class ReactionModel:
    """An N-component system ``u_t = D Δu + f(u)`` with diagonal ``D``.

    ``f`` and ``f_u`` act on arrays of shape ``(n_components, ...)`` so that
    whole fields can be evaluated in one call; ``f_u`` returns an array of
    shape ``(n, n, ...)``.
    """

    n_components: int
    diffusion: np.ndarray
    f: Callable[[np.ndarray], np.ndarray]
    f_u: Callable[[np.ndarray], np.ndarray]
    name: str = "model"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.diffusion, dtype=float).reshape(-1)
        if d.size != self.n_components:
            raise ValueError(
                f"diffusion has {d.size} entries, expected {self.n_components}"
            )
        if np.any(d <= 0):
            raise ValueError(
                "all diffusion coefficients must be strictly positive "
                f"(D = diag(d_j) > 0), got {d.tolist()}"
            )
        d.setflags(write=False)
        object.__setattr__(self, "diffusion", d)

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.diffusion)


@dataclass(frozen=True)
class BarkleyParams:
    a: float = 0.7
    b: float = 0.01
    eps: float = 0.02
    delta: float = 0.2

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"Barkley parameter a must be positive, got {self.a}")
        if self.eps <= 0:
            raise ValueError(f"Barkley parameter eps must be positive, got {self.eps}")
        if self.delta <= 0:
            raise ValueError(
                "Barkley delta (v-diffusion) must be positive: the wave-train "
                f"theory needs D = diag(d_j) > 0, got delta={self.delta}"
            )


def barkley_model(params: BarkleyParams | None = None) -> ReactionModel:
    """Barkley kinetics ``f1 = u(1-u)(u-(v+b)/a)/eps``, ``f2 = u - v``."""
    p = BarkleyParams() if params is None else params
    a, b, eps = p.a, p.b, p.eps

    def f(state):
        u, v = state[0], state[1]
        return np.stack([u * (1 - u) * (u - (v + b) / a) / eps, u - v])

    def f_u(state):
        u, v = state[0], state[1]
        th = (v + b) / a
        j11 = ((1 - 2 * u) * (u - th) + u * (1 - u)) / eps
        j12 = -u * (1 - u) / (a * eps)
        one = np.ones_like(u)
        return np.array([[j11, j12], [one, -one]])

    return ReactionModel(
        n_components=2,
        diffusion=np.array([1.0, p.delta]),
        f=f,
        f_u=f_u,
        name="barkley",
        params={"a": a, "b": b, "eps": eps, "delta": p.delta},
    )


def jacobian(model: ReactionModel, state) -> np.ndarray:
    """Analytic Jacobian ``f_u(state)`` of shape ``(n, n)`` (or ``(n, n, ...)``)."""
    state = np.asarray(state, dtype=float)
    if state.shape[0] != model.n_components:
        raise ValueError(
            f"state has {state.shape[0]} components, model {model.name!r} "
            f"expects {model.n_components}"
        )
    return np.asarray(model.f_u(state), dtype=float)


def fd_jacobian(model: ReactionModel, state, step: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of ``f`` at a single state vector."""
    state = np.asarray(state, dtype=float)
    n = model.n_components
    out = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        out[:, j] = (model.f(state + e) - model.f(state - e)) / (2 * step)
    return out


def _barkley_from_params(params: dict) -> ReactionModel:
    return barkley_model(BarkleyParams(**params))


MODEL_REGISTRY: dict[str, Callable[[dict], ReactionModel]] = {
    "barkley": _barkley_from_params,
}


def build_model(spec: dict) -> ReactionModel:
    """Build a model from a config mapping ``{"name": ..., "params": {...}}``."""
    name = spec.get("name", "barkley")
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; registered: {sorted(MODEL_REGISTRY)}"
        ) from None
    return factory(dict(spec.get("params", {})))

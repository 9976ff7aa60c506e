"""Vector nonlinearities F(u, x) with declared growth and Lipschitz constants.

The solver trusts ``declared_L`` for the contraction certificate; the audit
functions here check the declarations by seeded sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GrowthViolation, LipschitzViolation, NonFiniteValue, PeriodicityViolation
from .fourier import VectorField
from .problem import DomainSpec

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]
Profile = Callable[[np.ndarray], np.ndarray]

LIPSCHITZ_SLACK = 1e-6


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _stack_profiles(profiles: Sequence[Profile | None], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.stack([np.broadcast_to(np.asarray((g or _zero)(x), dtype=float), x.shape)
                     for g in profiles])


@dataclass(frozen=True)
class NonlinearityModel:
    """F: R^N x Omega -> R^N, evaluated on arrays.

    ``evaluator(u, x)`` takes u of shape (N, M) and x of shape (M,) and
    returns an (N, M) array. ``h`` is the nonnegative forcing profile of the
    growth bound |F(u, x)| <= declared_K |u| + h(x).
    """

    evaluator: Evaluator
    n_components: int
    declared_L: float
    declared_K: float
    h: Profile
    family: str
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.declared_L < 0 or self.declared_K < 0:
            raise ValueError("declared constants must be nonnegative")

    def __call__(self, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        return self.evaluator(u, x)

    @classmethod
    def affine(cls, matrix, forcing: Sequence[Profile | None] | None = None,
               declared_L: float | None = None) -> "NonlinearityModel":
        """F(u, x) = A u + g(x); L = K = ||A||_2 and h = |g(x)|."""
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError(f"affine matrix must be square, got {a.shape}")
        forcing = list(forcing) if forcing is not None else [None] * n
        if len(forcing) != n:
            raise ValueError(f"need {n} forcing profiles, got {len(forcing)}")
        norm = float(np.linalg.norm(a, 2))
        if declared_L is None:
            declared_L = norm

        def evaluate(u, x):
            return a @ u + _stack_profiles(forcing, x)

        def h(x):
            return np.linalg.norm(_stack_profiles(forcing, x), axis=0)

        return cls(evaluate, n, float(declared_L), norm, h, "affine",
                   {"matrix": a, "forcing": forcing})

    @classmethod
    def saturating(cls, sigma, directions, forcing: Sequence[Profile | None] | None = None,
                   declared_L: float | None = None,
                   declared_K: float | None = None) -> "NonlinearityModel":
        """F_k(u, x) = sigma_k tanh(<c_k, u>) + g_k(x).

        tanh has slope at most 1, so ||diag(sigma) C||_2 bounds both the
        Lipschitz and the growth constant.
        """
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        c = np.atleast_2d(np.asarray(directions, dtype=float))
        n = sigma.size
        if c.shape != (n, n):
            raise ValueError(f"directions must be {n}x{n}, got {c.shape}")
        forcing = list(forcing) if forcing is not None else [None] * n
        if len(forcing) != n:
            raise ValueError(f"need {n} forcing profiles, got {len(forcing)}")
        norm = float(np.linalg.norm(sigma[:, None] * c, 2))

        def evaluate(u, x):
            return sigma[:, None] * np.tanh(c @ u) + _stack_profiles(forcing, x)

        def h(x):
            return np.linalg.norm(_stack_profiles(forcing, x), axis=0)

        return cls(evaluate, n, float(norm if declared_L is None else declared_L),
                   float(norm if declared_K is None else declared_K), h, "saturating",
                   {"sigma": sigma, "directions": c, "forcing": forcing})

    @classmethod
    def tabulated(cls, nodes, values, directions, declared_L: float, declared_K: float,
                  forcing: Sequence[Profile | None] | None = None,
                  h: Profile | None = None) -> "NonlinearityModel":
        """F_k(u, x) = T_k(<c_k, u>) + g_k(x), T_k piecewise linear through (nodes, values[k]).

        Constants are user-declared and must be audited before use.
        """
        nodes = np.asarray(nodes, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        c = np.atleast_2d(np.asarray(directions, dtype=float))
        n = values.shape[0]
        if c.shape != (n, n) or values.shape[1] != nodes.size:
            raise ValueError("tabulated shapes are inconsistent")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("table nodes must be strictly increasing")
        forcing = list(forcing) if forcing is not None else [None] * n

        def evaluate(u, x):
            s = c @ u
            table = np.stack([np.interp(s[k], nodes, values[k]) for k in range(n)])
            return table + _stack_profiles(forcing, x)

        if h is None:
            # |T(s)| <= |T(s) - T(0)| + |T(0)|, so h absorbs the table's value at 0
            offset = float(np.linalg.norm([np.interp(0.0, nodes, values[k]) for k in range(n)]))

            def h(x):
                return np.linalg.norm(_stack_profiles(forcing, x), axis=0) + offset

        return cls(evaluate, n, float(declared_L), float(declared_K), h, "tabulated",
                   {"nodes": nodes, "values": values, "directions": c, "forcing": forcing})

    @classmethod
    def custom(cls, evaluator: Evaluator, n_components: int, declared_L: float,
               declared_K: float, h: Profile | None = None) -> "NonlinearityModel":
        return cls(evaluator, n_components, float(declared_L), float(declared_K),
                   h or _zero, "custom")

    @property
    def requires_audit(self) -> bool:
        return self.family in ("tabulated", "custom")


def eval_F(model: NonlinearityModel, v: VectorField) -> VectorField:
    """Pointwise x -> F(v(x), x) on the grid of ``v``."""
    out = np.asarray(model(v.physical, v.domain.x), dtype=float)
    if out.shape != v.physical.shape:
        raise ValueError(f"nonlinearity returned shape {out.shape}, expected {v.physical.shape}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteValue("nonlinearity produced non-finite values")
    return VectorField.from_samples(v.domain, out)


def _ball(rng: np.random.Generator, n: int, count: int, radius: float) -> np.ndarray:
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return d * r[:, None]


@dataclass(frozen=True)
class LipschitzAudit:
    estimate: float
    declared: float
    trials: int
    passed: bool


def verify_lipschitz(model: NonlinearityModel, domain: DomainSpec, trials: int = 10_000,
                     seed: int = 0, radius: float = 10.0) -> LipschitzAudit:
    """Largest sampled |F(u1,x) - F(u2,x)| / |u1 - u2| over a ball of ``radius``.

    Half the pairs are independent points of the ball, half are local
    perturbations with log-uniform separation, which finds steep slopes of
    saturating maps. Raises :class:`LipschitzViolation` when the estimate
    exceeds declared_L by more than a relative 1e-6.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = model.n_components
    u1 = _ball(rng, n, trials, radius)
    far = _ball(rng, n, trials, radius)
    step = _ball(rng, n, trials, 1.0)
    step *= (10.0 ** rng.uniform(-3, 0, trials))[:, None]
    local = rng.random(trials) < 0.5
    u2 = np.where(local[:, None], u1 + step, far)
    x = domain.x[rng.integers(0, domain.grid_points, trials)]
    diff = model(u1.T, x) - model(u2.T, x)
    num = np.linalg.norm(diff, axis=0)
    den = np.linalg.norm(u1 - u2, axis=1)
    ok = den > 0
    ratio = np.zeros(trials)
    ratio[ok] = num[ok] / den[ok]
    i = int(np.argmax(ratio))
    est = float(ratio[i])
    passed = est <= model.declared_L * (1.0 + LIPSCHITZ_SLACK)
    if not passed:
        raise LipschitzViolation(
            f"sampled Lipschitz ratio {est:.6g} exceeds declared L={model.declared_L:.6g}",
            {"u1": u1[i].tolist(), "u2": u2[i].tolist(), "x": float(x[i]), "ratio": est},
        )
    return LipschitzAudit(est, model.declared_L, trials, passed)


@dataclass(frozen=True)
class GrowthAudit:
    max_excess: float
    min_margin: float
    trials: int
    periodic_checked: bool


def verify_growth(model: NonlinearityModel, domain: DomainSpec, trials: int = 10_000,
                  seed: int = 0, radius: float = 10.0) -> GrowthAudit:
    """Check |F(u,x)| <= declared_K |u| + h(x) on samples, and F(u,0) = F(u,2 pi) on I."""
    rng = np.random.default_rng(seed)
    n = model.n_components
    u = _ball(rng, n, trials, radius)
    x = domain.x[rng.integers(0, domain.grid_points, trials)]
    lhs = np.linalg.norm(model(u.T, x), axis=0)
    rhs = model.declared_K * np.linalg.norm(u, axis=1) + np.asarray(model.h(x), dtype=float)
    excess = lhs - rhs
    i = int(np.argmax(excess))
    if excess[i] > 1e-12 * max(1.0, rhs[i]):
        raise GrowthViolation(
            f"|F(u,x)| exceeds K|u| + h(x) by {excess[i]:.3e}",
            {"u": u[i].tolist(), "x": float(x[i]), "excess": float(excess[i])},
        )
    if domain.periodic:
        ends = np.array([0.0, domain.length])
        for j in range(min(trials, 1000)):
            col = np.repeat(u[j][:, None], 2, axis=1)
            f = model(col, ends)
            gap = float(np.max(np.abs(f[:, 0] - f[:, 1])))
            if gap > 1e-10 * (1.0 + float(np.max(np.abs(f)))):
                raise PeriodicityViolation(
                    f"F(u, 0) != F(u, 2 pi) (gap {gap:.3e})",
                    {"u": u[j].tolist(), "gap": gap},
                )
    return GrowthAudit(float(excess[i]), float(-excess[i]), trials, domain.periodic)

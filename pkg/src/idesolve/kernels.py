"""Kernel analysis: moments, Fourier profiles, orthogonality and essential spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, MissingSpecialValue
from .fourier import SQRT_2PI, SpectralField
from .problem import CaseTag, DomainSpec, EquationSpec, resonant_index

ORTH_TOL = 1e-8


def simpson_weights(m: int, h: float) -> np.ndarray:
    """Composite Simpson weights for m samples of a function closed periodically.

    The box [x_0, x_0 + m*h] has m intervals (m even); the missing endpoint
    sample equals the first one, which folds the two end weights together.
    """
    if m % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    w = np.where(np.arange(m) % 2 == 0, 2.0 * h / 3.0, 4.0 * h / 3.0)
    return w


def kernel_moments(g, domain: DomainSpec) -> tuple[float, float, float]:
    """(||G||_1, ||x G||_1, ||x^2 G||_1) over the box by composite Simpson."""
    if domain.periodic:
        raise DomainError("kernel moments are defined on the real line only")
    g = np.asarray(g, dtype=float)
    w = simpson_weights(domain.grid_points, domain.step)
    x = domain.x
    a = np.abs(g)
    return (float(w @ a), float(w @ (np.abs(x) * a)), float(w @ (x * x * a)))


def fourier_quadrature(g, domain: DomainSpec, s: float, order: int = 0) -> complex:
    """d^order/dp^order of the transform at frequency s, by direct quadrature.

    Evaluates (2*pi)^(-1/2) * int (-i x)^order G(x) exp(-i s x) dx with composite
    Simpson weights, independent of the frequency grid.
    """
    g = np.asarray(g, dtype=float)
    x = domain.x
    w = simpson_weights(domain.grid_points, domain.step)
    integrand = g * np.exp(-1j * s * x)
    if order:
        integrand = integrand * (-1j * x) ** order
    return complex(w @ integrand) / SQRT_2PI


@dataclass(frozen=True)
class KernelSpectrum:
    """Transform of one kernel plus the data the solvability conditions need.

    On the real line ``values``/``derivatives`` map a frequency to G^ and
    dG^/dp there; ``second_at_zero`` is d^2 G^/dp^2 at p = 0. On the interval
    ``values`` maps integers to Fourier coefficients.
    """

    base: SpectralField
    l1_norm: float
    moments: tuple[float, float, float] | None
    values: dict[float, complex] = field(default_factory=dict)
    derivatives: dict[float, complex] = field(default_factory=dict)
    second_at_zero: complex | None = None
    sup_bound: float = 0.0

    @property
    def domain(self) -> DomainSpec:
        return self.base.domain

    @property
    def spectrum(self) -> np.ndarray:
        return self.base.spectrum

    @property
    def scale(self) -> float:
        """Bound on |G^| from the L^1 norm (m0/sqrt(2 pi))."""
        return self.l1_norm / SQRT_2PI

    @property
    def derivative_bound(self) -> float:
        return 0.0 if self.moments is None else self.moments[1] / SQRT_2PI

    @property
    def second_derivative_bound(self) -> float:
        return 0.0 if self.moments is None else self.moments[2] / SQRT_2PI

    def value_at(self, p: float) -> complex:
        """G^(p) at an arbitrary frequency (coefficient G_p on the interval)."""
        if p in self.values:
            return self.values[p]
        if self.domain.periodic:
            n = int(round(p))
            if n != p:
                raise MissingSpecialValue(f"interval coefficients need an integer mode, got {p}")
            if abs(n) <= self.domain.n_max:
                return complex(self.spectrum[n + self.domain.n_max])
        return fourier_quadrature(self.base.physical, self.domain, p)

    def derivative_at(self, p: float) -> complex:
        if p in self.derivatives:
            return self.derivatives[p]
        if self.domain.periodic:
            raise MissingSpecialValue("derivatives in frequency exist on the real line only")
        return fourier_quadrature(self.base.physical, self.domain, p, order=1)


def spectral_profile(g, domain: DomainSpec, special_points: Iterable[float] = ()) -> KernelSpectrum:
    """Build the :class:`KernelSpectrum` of sampled kernel ``g``.

    Special values are computed by direct quadrature of G(x) exp(-i s x) and
    -i x G(x) exp(-i s x), not by interpolating the grid spectrum.
    """
    g = np.asarray(g, dtype=float)
    base = SpectralField.from_samples(domain, g)
    sup = float(np.max(np.abs(base.spectrum)))
    if domain.periodic:
        l1 = float(simpson_weights(domain.grid_points, domain.step) @ np.abs(g))
        rect_l1 = float(np.sum(np.abs(g)) * domain.step)
        values = {}
        for s in special_points:
            n = int(round(s))
            if abs(n) <= domain.n_max:
                values[float(n)] = complex(base.spectrum[n + domain.n_max])
            else:
                values[float(n)] = fourier_quadrature(g, domain, n)
        ks = KernelSpectrum(base, l1, None, values, {}, None, sup)
        # coefficients obey |G_n| <= ||G||_{L1(I)} / sqrt(2 pi); the discrete sum
        # is bounded by the rectangle-rule norm exactly
        assert sup <= max(ks.scale, rect_l1 / SQRT_2PI) * (1 + 1e-10) + 1e-14, \
            "coefficient bound violated"
        return ks

    moments = kernel_moments(g, domain)
    points = sorted({0.0, *map(float, special_points)})
    values = {s: fourier_quadrature(g, domain, s) for s in points}
    derivatives = {s: fourier_quadrature(g, domain, s, order=1) for s in points}
    second = fourier_quadrature(g, domain, 0.0, order=2)
    ks = KernelSpectrum(base, moments[0], moments, values, derivatives, second, sup)
    # the rectangle-rule transform is bounded by the rectangle L1 norm; Simpson's
    # m0 agrees with it to quadrature accuracy
    rect_l1 = float(np.sum(np.abs(g)) * domain.step)
    assert sup <= max(ks.scale, rect_l1 / SQRT_2PI) + 1e-10 * max(1.0, ks.scale), \
        "sup |G^| exceeds ||G||_1 / sqrt(2 pi)"
    return ks


def required_special_points(eq: EquationSpec, tag: CaseTag) -> tuple[float, ...]:
    """Frequencies at which the solvability conditions for ``tag`` are evaluated."""
    if tag in (CaseTag.R_B, CaseTag.R_D, CaseTag.I_B, CaseTag.I_E):
        return (0.0,)
    if tag is CaseTag.R_C:
        r = math.sqrt(eq.a)
        return (r, -r)
    if tag is CaseTag.I_D:
        n = float(resonant_index(eq))
        return (n, -n)
    return ()


@dataclass(frozen=True)
class OrthogonalityCondition:
    name: str
    raw: complex
    scale: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "raw_real": self.raw.real,
            "raw_imag": self.raw.imag,
            "abs_raw": abs(self.raw),
            "scale": self.scale,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class OrthogonalityReport:
    tag: CaseTag
    conditions: tuple[OrthogonalityCondition, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.conditions if not c.passed)

    def __getitem__(self, name: str) -> OrthogonalityCondition:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def _special(table: dict, s: float, what: str) -> complex:
    try:
        return table[s]
    except KeyError:
        raise MissingSpecialValue(f"{what} at frequency {s:g} was not computed") from None


def check_orthogonality(ks: KernelSpectrum, tag: CaseTag, eq: EquationSpec,
                        tol: float = ORTH_TOL) -> OrthogonalityReport:
    """Evaluate the orthogonality conditions that case ``tag`` demands.

    Raw values are Fourier quantities: G^(0) stands for (G, 1)/sqrt(2 pi),
    G^(+-sqrt(a)) for (G, exp(+-i sqrt(a) x)/sqrt(2 pi)), dG^/dp(0) for
    -i (G, x)/sqrt(2 pi), and G_n for the interval inner products.
    A condition passes when |raw| <= tol * scale.
    """

    def cond(name, raw, scale):
        return OrthogonalityCondition(name, complex(raw), float(scale), abs(raw) <= tol * scale)

    scale = ks.scale
    if tag in (CaseTag.R_A, CaseTag.I_A, CaseTag.I_C):
        conds = ()
    elif tag is CaseTag.R_B:
        conds = (cond("or1", _special(ks.values, 0.0, "G^"), scale),)
    elif tag is CaseTag.R_C:
        r = math.sqrt(eq.a)
        conds = (cond("or12+", _special(ks.values, r, "G^"), scale),
                 cond("or12-", _special(ks.values, -r, "G^"), scale))
    elif tag is CaseTag.R_D:
        conds = (cond("or13-mass", _special(ks.values, 0.0, "G^"), scale),
                 cond("or13-dipole", _special(ks.derivatives, 0.0, "dG^/dp"),
                      ks.derivative_bound))
    elif tag in (CaseTag.I_B, CaseTag.I_E):
        conds = (cond("or2", _special(ks.values, 0.0, "G_n"), scale),)
    elif tag is CaseTag.I_D:
        n = float(resonant_index(eq))
        conds = (cond("or21+", _special(ks.values, n, "G_n"), scale),
                 cond("or21-", _special(ks.values, -n, "G_n"), scale))
    else:  # pragma: no cover
        raise ValueError(f"unknown case {tag}")
    return OrthogonalityReport(tag, conds)


@dataclass(frozen=True)
class EssentialSpectrum:
    p: np.ndarray
    values: np.ndarray
    min_abs: float
    argmin: float
    fredholm: bool


def symbol(eq: EquationSpec, p) -> np.ndarray:
    """lambda(p) = p^2 - a - i b p (b = 0 without drift)."""
    p = np.asarray(p, dtype=float)
    return p * p - eq.a - 1j * eq.drift * p


def _min_abs_continuum(a: float, b: float) -> tuple[float, float]:
    # |lambda|^2 = (t - a)^2 + b^2 t with t = p^2 >= 0; stationary at t* = a - b^2/2
    t_star = a - 0.5 * b * b
    if t_star > 0:
        return math.sqrt(max(a * b * b - 0.25 * b**4, 0.0)), math.sqrt(t_star)
    return abs(a), 0.0


def _min_abs_integers(a: float, b: float) -> tuple[float, float]:
    reach = int(math.ceil(math.sqrt(abs(a)) + abs(b))) + 2
    n = np.arange(-reach, reach + 1, dtype=float)
    vals = np.abs(n * n - a - 1j * b * n)
    i = int(np.argmin(vals))
    return float(vals[i]), float(n[i])


def essential_spectrum(eq: EquationSpec, p_samples: Sequence[float],
                       domain: DomainSpec | None = None) -> EssentialSpectrum:
    """Symbol curve on ``p_samples`` and the Fredholm verdict.

    The distance from the origin is found in closed form: over the continuum
    on the real line (``domain`` None or a real line) and over all integers on
    the periodic interval, without any resonant-mode constraint.
    """
    p = np.asarray(p_samples, dtype=float)
    values = symbol(eq, p)
    if domain is not None and domain.periodic:
        dist, at = _min_abs_integers(eq.a, eq.drift)
    else:
        dist, at = _min_abs_continuum(eq.a, eq.drift)
    return EssentialSpectrum(p, values, dist, at, dist > 0.0)

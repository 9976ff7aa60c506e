"""Singularity-safe solution multipliers and the contraction certificate.

Equation k is solved in Fourier space as u_k^ = sqrt(2 pi) m_k f_k^ with

    m_k(p) = G_k^(p) / (p^2 - a_k - i b_k p)      (drift)
    m_k(p) = G_k^(p) / (p^2 - a_k)                (no drift)

Where the symbol vanishes on the real line the quotient is evaluated with the
certified-zero Taylor terms of G^ subtracted, and at the singular frequency
itself by its analytic limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SolvabilityViolation
from .kernels import KernelSpectrum, check_orthogonality, symbol
from .problem import CaseTag, ConstraintSet, EquationSpec, ProblemSpec, classify_equation, \
    constrained_modes

CERTIFIED_MAX = 0.95
CENTER_TOL = 1e-12


def window_half_width(eq: EquationSpec, tag: CaseTag) -> float:
    if tag is CaseTag.R_C:
        return min(math.sqrt(eq.a) / 2.0, 1.0)
    if tag in (CaseTag.R_B, CaseTag.R_D):
        return 1.0
    return 0.0


def singular_centers(eq: EquationSpec, tag: CaseTag) -> tuple[float, ...]:
    if tag is CaseTag.R_C:
        r = math.sqrt(eq.a)
        return (r, -r)
    if tag in (CaseTag.R_B, CaseTag.R_D):
        return (0.0,)
    return ()


def _require_solvable(eq: EquationSpec, tag: CaseTag, ks: KernelSpectrum, k: int | None = None):
    report = check_orthogonality(ks, tag, eq)
    if not report.passed:
        who = "" if k is None else f"equation {k + 1} "
        raise SolvabilityViolation(
            f"{who}({tag}) fails orthogonality condition(s) {', '.join(report.failed)}; "
            "the multiplier is unbounded",
            report.failed,
        )
    return report


def _real_line_multiplier(eq: EquationSpec, tag: CaseTag, ks: KernelSpectrum,
                          p: np.ndarray, ghat: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    ghat = np.asarray(ghat, dtype=complex)
    lam = symbol(eq, p)
    out = np.empty(p.shape, dtype=complex)
    delta = window_half_width(eq, tag)
    plain = np.ones(p.shape, dtype=bool)

    if tag is CaseTag.R_B:
        b = eq.drift
        win = np.abs(p) < delta
        center = np.abs(p) <= CENTER_TOL
        inner = win & ~center
        q = p[inner]
        out[inner] = (ghat[inner] - ks.values[0.0]) / (q * (q - 1j * b))
        out[center] = ks.derivatives[0.0] / (-1j * b)
        plain &= ~win
    elif tag is CaseTag.R_C:
        a = eq.a
        for s in singular_centers(eq, tag):
            win = np.abs(p - s) < delta
            center = np.abs(p - s) <= CENTER_TOL * max(1.0, abs(s))
            inner = win & ~center
            out[inner] = (ghat[inner] - ks.values[s]) / (p[inner] ** 2 - a)
            out[center] = ks.derivatives[s] / (2.0 * s)
            plain &= ~win
    elif tag is CaseTag.R_D:
        win = np.abs(p) < delta
        center = np.abs(p) <= CENTER_TOL
        inner = win & ~center
        q = p[inner]
        out[inner] = (ghat[inner] - ks.values[0.0] - q * ks.derivatives[0.0]) / (q * q)
        out[center] = ks.second_at_zero / 2.0
        plain &= ~win

    out[plain] = ghat[plain] / lam[plain]
    return out


def eval_multiplier(eq: EquationSpec, ks: KernelSpectrum, p: float) -> complex:
    """m(p) for one equation at any frequency (an integer mode on the interval).

    Raises :class:`SolvabilityViolation` when an orthogonality condition the
    equation's case requires does not hold. Constrained interval modes return 0.
    """
    domain = ks.domain
    tag = classify_equation(eq, domain)
    _require_solvable(eq, tag, ks)
    if domain.periodic:
        n = int(round(p))
        if n in constrained_modes(tag, eq):
            return 0j
        return complex(ks.value_at(float(n)) / symbol(eq, float(n)))
    ghat = np.array([ks.value_at(float(p))])
    return complex(_real_line_multiplier(eq, tag, ks, np.array([float(p)]), ghat)[0])


@dataclass(frozen=True)
class MultiplierTable:
    """m_k on the frequency grid, one row per equation.

    ``windows[k]`` lists the (centre, half-width) pairs where subtraction
    formulas replaced the direct quotient.
    """

    frequencies: np.ndarray
    values: np.ndarray
    windows: tuple[tuple[tuple[float, float], ...], ...]
    constrained: np.ndarray


def multiplier_table(problem: ProblemSpec, spectra: Sequence[KernelSpectrum],
                     constraints: ConstraintSet | None = None) -> MultiplierTable:
    domain = problem.domain
    p = domain.frequencies
    rows, windows, masks = [], [], []
    for k, (eq, tag, ks) in enumerate(zip(problem.equations, problem.tags, spectra)):
        _require_solvable(eq, tag, ks, k)
        if domain.periodic:
            modes = constraints[k] if constraints is not None else constrained_modes(tag, eq)
            mask = np.isin(p, list(modes))
            lam = symbol(eq, p)
            row = np.zeros(p.shape, dtype=complex)
            row[~mask] = ks.spectrum[~mask] / lam[~mask]
            windows.append(())
        else:
            mask = np.zeros(p.shape, dtype=bool)
            row = _real_line_multiplier(eq, tag, ks, p, ks.spectrum)
            delta = window_half_width(eq, tag)
            windows.append(tuple((s, delta) for s in singular_centers(eq, tag)))
        if not np.all(np.isfinite(row)):
            raise SolvabilityViolation(f"equation {k + 1}: multiplier is not finite on the grid")
        rows.append(row)
        masks.append(mask)
    return MultiplierTable(p, np.array(rows), tuple(windows), np.array(masks))


@dataclass(frozen=True)
class Bounds:
    """Per-equation sup bounds and their group maxima.

    ``per_equation[k]`` is max(sup |m_k|, sup |p^2 m_k|) over the grid; the
    drift group maximum is N_{a,b}, the drift-free one M_a, and ``q`` their max.
    An empty group contributes 0.
    """

    per_equation: tuple[float, ...]
    drift_flags: tuple[bool, ...]
    drift_group: float
    nodrift_group: float
    q: float
    grid: str


def compute_bounds(problem: ProblemSpec, spectra: Sequence[KernelSpectrum],
                   table: MultiplierTable | None = None) -> Bounds:
    if table is None:
        table = multiplier_table(problem, spectra)
    p2 = table.frequencies ** 2
    per = []
    for k in range(problem.n_equations):
        keep = ~table.constrained[k]
        m = np.abs(table.values[k][keep])
        per.append(float(max(np.max(m, initial=0.0), np.max(p2[keep] * m, initial=0.0))))
    flags = tuple(eq.has_drift for eq in problem.equations)
    drift = max((b for b, f in zip(per, flags) if f), default=0.0)
    nodrift = max((b for b, f in zip(per, flags) if not f), default=0.0)
    return Bounds(tuple(per), flags, drift, nodrift, max(drift, nodrift),
                  problem.domain.describe())


@dataclass(frozen=True)
class ContractionCertificate:
    bounds: Bounds | None
    q: float
    lipschitz: float
    factor: float
    passed: bool
    status: str

    def as_dict(self) -> dict:
        b = self.bounds
        return {
            "per_equation_bounds": list(b.per_equation) if b else [],
            "drift_group_max": b.drift_group if b else None,
            "nodrift_group_max": b.nodrift_group if b else None,
            "Q": self.q,
            "lipschitz": self.lipschitz,
            "factor": self.factor,
            "passed": self.passed,
            "status": self.status,
            "grid": b.grid if b else None,
        }


def contraction_certificate(bounds: Bounds | float, lipschitz: float) -> ContractionCertificate:
    """factor = 2 sqrt(pi) Q L; passes when factor < 1.

    ``status`` is "certified" for factor <= 0.95, "uncertified-convergent" for
    0.95 < factor < 1 (the grid maximum may underestimate the true sup) and
    "failed" otherwise.
    """
    if lipschitz < 0:
        raise ValueError("Lipschitz constant must be nonnegative")
    q = bounds.q if isinstance(bounds, Bounds) else float(bounds)
    factor = 2.0 * math.sqrt(math.pi) * q * lipschitz
    passed = factor < 1.0
    if factor <= CERTIFIED_MAX:
        status = "certified"
    elif passed:
        status = "uncertified-convergent"
    else:
        status = "failed"
    return ContractionCertificate(bounds if isinstance(bounds, Bounds) else None,
                                  q, float(lipschitz), factor, passed, status)

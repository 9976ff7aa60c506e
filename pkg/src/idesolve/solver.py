"""Spectral Picard iteration for the auxiliary map v -> u.

Given v, each component of u solves

    -u_k'' - b_k u_k' - a_k u_k = int G_k(x - y) F_k(v(y), y) dy,

which in Fourier space is u_k^ = sqrt(2 pi) m_k f_k^ with f_k = F_k(v(.), .).
On the periodic interval the resonant modes of the constrained subspaces are
set to zero. The map is a contraction with factor 2 sqrt(pi) Q L whenever the
certificate passes, and its fixed point solves the original system.
"""

from __future__ import annotations

import math
import time
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CertificateFailed, ConstraintInconsistency, ContractionViolation, \
    NoConvergence, SolvabilityViolation, TruncationWarning
from .fourier import SQRT_2PI, VectorField, forward_transform, h2_norm_spectra
from .kernels import ORTH_TOL, KernelSpectrum, OrthogonalityReport, check_orthogonality, \
    required_special_points, spectral_profile
from .multipliers import Bounds, ContractionCertificate, MultiplierTable, compute_bounds, \
    contraction_certificate, multiplier_table
from .nonlinearity import eval_F
from .problem import ConstraintSet, ProblemSpec, ValidationReport, build_constraints, \
    validate_problem

RATIO_SLACK = 0.05
SUPPORT_TOL = 1e-10


@dataclass(frozen=True)
class Analysis:
    """Everything the map needs, computed once per problem.

    ``table``, ``bounds`` and ``certificate`` are None when some equation
    fails its orthogonality conditions.
    """

    problem: ProblemSpec
    validation: ValidationReport
    constraints: ConstraintSet
    spectra: tuple[KernelSpectrum, ...]
    orthogonality: tuple[OrthogonalityReport, ...]
    table: MultiplierTable | None
    bounds: Bounds | None
    certificate: ContractionCertificate | None

    @property
    def solvable(self) -> bool:
        return all(r.passed for r in self.orthogonality)

    def failed_conditions(self) -> list[tuple[int, str]]:
        return [(k + 1, name) for k, r in enumerate(self.orthogonality) for name in r.failed]


def analyze(problem: ProblemSpec, strict_paper_mode: bool = False) -> Analysis:
    spectra = tuple(
        spectral_profile(g, problem.domain, required_special_points(eq, tag))
        for g, eq, tag in zip(problem.kernels, problem.equations, problem.tags)
    )
    reports = tuple(
        check_orthogonality(ks, tag, eq)
        for ks, eq, tag in zip(spectra, problem.equations, problem.tags)
    )
    constraints = build_constraints(problem)
    table = bounds = cert = None
    if all(r.passed for r in reports):
        table = multiplier_table(problem, spectra, constraints)
        bounds = compute_bounds(problem, spectra, table)
        cert = contraction_certificate(bounds, problem.nonlinearity.declared_L)
    return Analysis(problem, validate_problem(problem, strict_paper_mode), constraints,
                    spectra, reports, table, bounds, cert)


def _require_table(analysis: Analysis) -> MultiplierTable:
    if analysis.table is None:
        failed = analysis.failed_conditions()
        raise SolvabilityViolation(
            "orthogonality conditions fail: "
            + ", ".join(f"equation {k} {name}" for k, name in failed),
            tuple(name for _, name in failed),
        )
    return analysis.table


def project(v: VectorField, analysis: Analysis) -> VectorField:
    """Zero the constrained modes (and the real-line Nyquist entry) of ``v``."""
    spec = np.array(v.spectrum, dtype=complex)
    table = _require_table(analysis)
    spec[table.constrained] = 0
    if not v.domain.periodic:
        spec[:, 0] = 0
    return VectorField.from_spectra(v.domain, spec)


def apply_map(v: VectorField, analysis: Analysis) -> VectorField:
    """One application of the auxiliary map, u = T v."""
    table = _require_table(analysis)
    problem = analysis.problem
    f_hat = eval_F(problem.nonlinearity, v).spectrum
    u_hat = SQRT_2PI * table.values * f_hat
    if problem.domain.periodic:
        for k, ks in enumerate(analysis.spectra):
            mask = table.constrained[k]
            if not mask.any():
                continue
            rhs = SQRT_2PI * ks.spectrum[mask] * f_hat[k, mask]
            limit = ORTH_TOL * SQRT_2PI * ks.scale * max(float(np.max(np.abs(f_hat[k]))), 1e-300)
            if np.any(np.abs(rhs) > limit):
                raise ConstraintInconsistency(
                    f"equation {k + 1}: forcing has mass {float(np.max(np.abs(rhs))):.3e} "
                    "on a constrained mode"
                )
            u_hat[k, mask] = 0
    else:
        # the Nyquist entry has no conjugate partner on the grid
        u_hat[:, 0] = 0
    return VectorField.from_spectra(problem.domain, u_hat)


@dataclass(frozen=True)
class TraceRow:
    step: int
    increment_h2: float
    ratio: float | None
    residual_l2: float | None
    wall_ms: float | None


@dataclass(frozen=True)
class IterationTrace:
    rows: tuple[TraceRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def increments(self) -> np.ndarray:
        return np.array([r.increment_h2 for r in self.rows])

    @property
    def ratios(self) -> list[float | None]:
        return [r.ratio for r in self.rows]

    def max_ratio(self, start: int = 2) -> float:
        vals = [r.ratio for r in self.rows if r.step >= start and r.ratio is not None]
        return max(vals, default=0.0)


@dataclass(frozen=True)
class OverlapEvidence:
    measure: float
    count: int
    top: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class NontrivialityReport:
    nontrivial: bool
    per_equation: tuple[OverlapEvidence, ...]


@dataclass(frozen=True)
class Solution:
    fixed_point: VectorField
    trace: IterationTrace
    certificate: ContractionCertificate
    nontriviality: NontrivialityReport
    converged: bool
    fixed_point_residual: float
    a_priori_bound: float | None
    a_posteriori_bound: float | None
    warnings: tuple[str, ...] = field(default=())

    @property
    def nontrivial(self) -> bool:
        return self.nontriviality.nontrivial


def nontriviality_check(problem: ProblemSpec, spectra: Sequence[KernelSpectrum],
                        tol: float = SUPPORT_TOL) -> NontrivialityReport:
    """Overlap of the spectral supports of G_k and F_k(0, .).

    A frequency counts when |G_k^| |F_k(0,.)^| exceeds ``tol`` times the
    product of the two maxima. On the real line the overlap measure is the
    count times the grid spacing.
    """
    domain = problem.domain
    zero = np.zeros((problem.n_equations, domain.grid_points))
    f0 = forward_transform(problem.nonlinearity(zero, domain.x), domain)
    p = domain.frequencies
    evidence = []
    for k, ks in enumerate(spectra):
        g = np.abs(ks.spectrum)
        f = np.abs(f0[k])
        prod = g * f
        scale = float(np.max(g) * np.max(f))
        hit = prod > tol * scale if scale > 0 else np.zeros(p.shape, dtype=bool)
        order = np.argsort(-prod[hit], kind="stable")[:5]
        top = tuple((float(p[hit][i]), float(prod[hit][i])) for i in order)
        count = int(np.count_nonzero(hit))
        evidence.append(OverlapEvidence(count * domain.frequency_step, count, top))
    return NontrivialityReport(any(e.count > 0 for e in evidence), tuple(evidence))


def random_field(domain, n: int, rng: np.random.Generator, amplitude: float = 1.0) -> VectorField:
    """Seeded smooth real field, band-limited on I and rapidly decaying on R."""
    if domain.periodic:
        top = min(domain.n_max, 8)
        spec = np.zeros((n, domain.spectrum_size), dtype=complex)
        c = domain.n_max
        modes = np.arange(1, top + 1)
        coef = (rng.standard_normal((n, top)) + 1j * rng.standard_normal((n, top)))
        coef *= amplitude / (1.0 + modes**2)
        spec[:, c + modes] = coef
        spec[:, c - modes] = np.conj(coef)
        spec[:, c] = amplitude * rng.standard_normal(n)
        return VectorField.from_spectra(domain, spec)
    x = domain.x
    span = domain.half_width / 4.0
    out = np.zeros((n, domain.grid_points))
    for k in range(n):
        for _ in range(4):
            centre = rng.uniform(-span, span)
            width = rng.uniform(0.5, 2.0)
            freq = rng.uniform(0.0, 3.0)
            phase = rng.uniform(0.0, 2 * math.pi)
            out[k] += amplitude * rng.standard_normal() * np.exp(-0.5 * ((x - centre) / width) ** 2) \
                * np.cos(freq * x + phase)
    return VectorField.from_samples(domain, out)


def _diff_norm(a: VectorField, b: VectorField) -> float:
    return h2_norm_spectra(a.spectrum - b.spectrum, a.domain)


def picard_solve(problem: ProblemSpec, v0: VectorField | None = None, tol: float = 1e-10,
                 max_iter: int = 500, *, analysis: Analysis | None = None,
                 residual_cadence: int = 5, allow_uncertified: bool = False,
                 require_certified: bool = False, reference_mode: bool = True) -> Solution:
    """Iterate v <- T v from ``v0`` (default 0) until the H^2 increment is at most ``tol``.

    With a passing certificate the iteration also stops once the a-posteriori
    bound factor/(1 - factor) * increment is at most ``tol``; in particular a
    u-independent nonlinearity (factor 0) stops after one step. Raises
    :class:`CertificateFailed` when factor >= 1 (or, with
    ``require_certified``, when factor > 0.95) unless ``allow_uncertified``.
    In reference mode wall times are not recorded, so traces are reproducible.
    """
    from .oracle import residual_physical

    if analysis is None:
        analysis = analyze(problem)
    _require_table(analysis)
    cert = analysis.certificate
    if not allow_uncertified:
        if not cert.passed:
            raise CertificateFailed(
                f"contraction factor 2 sqrt(pi) Q L = {cert.factor:.6g} is not below 1"
            )
        if require_certified and cert.status != "certified":
            raise CertificateFailed(
                f"contraction factor {cert.factor:.6g} exceeds the certified limit 0.95"
            )
    domain = problem.domain
    v = VectorField.zeros(domain, problem.n_equations) if v0 is None else project(v0, analysis)

    rows: list[TraceRow] = []
    first = prev = None
    converged = False
    factor = cert.factor
    for step in range(1, max_iter + 1):
        t0 = time.perf_counter()
        u = apply_map(v, analysis)
        delta = _diff_norm(u, v)
        residual = None
        if residual_cadence and step % residual_cadence == 0:
            residual = residual_physical(u, problem).total_l2
        wall = None if reference_mode else 1e3 * (time.perf_counter() - t0)
        ratio = delta / prev if prev else None
        rows.append(TraceRow(step, delta, ratio, residual, wall))
        first = delta if first is None else first
        prev = delta
        v = u
        if delta <= tol or (cert.passed and factor * delta <= tol * (1.0 - factor)):
            converged = True
            break

    trace = IterationTrace(tuple(rows))
    again = apply_map(v, analysis)
    warnings = []
    if v.truncated:
        warnings.append("fixed point is not negligible near the box edge (truncation)")
        _warnings.warn(warnings[-1], TruncationWarning, stacklevel=2)
    a_priori = a_post = None
    if cert.passed:
        a_priori = first * factor ** len(rows) / (1.0 - factor)
        a_post = factor * prev / (1.0 - factor)
    solution = Solution(v, trace, cert, nontriviality_check(problem, analysis.spectra),
                        converged, _diff_norm(again, v), a_priori, a_post, tuple(warnings))
    if not converged:
        raise NoConvergence(
            f"increment {prev:.3e} still above tol={tol:g} after {max_iter} steps", solution
        )
    return solution


@dataclass(frozen=True)
class ContractionProbe:
    max_ratio: float
    factor: float
    pairs_used: int


def empirical_contraction(problem: ProblemSpec, pairs: int = 100, seed: int = 0, *,
                          analysis: Analysis | None = None,
                          amplitude: float = 1.0) -> ContractionProbe:
    """Largest observed ||T v1 - T v2|| / ||v1 - v2|| over seeded random pairs (H^2 norms).

    Pairs with v1 = v2 are skipped. Raises :class:`ContractionViolation` when a
    ratio exceeds factor * (1 + 1e-6) + 1e-10.
    """
    if analysis is None:
        analysis = analyze(problem)
    _require_table(analysis)
    factor = analysis.certificate.factor
    rng = np.random.default_rng(seed)
    n = problem.n_equations
    worst, used = 0.0, 0
    for i in range(pairs):
        scale = amplitude * 10.0 ** rng.uniform(-1, 1)
        v1 = project(random_field(problem.domain, n, rng, scale), analysis)
        v2 = project(random_field(problem.domain, n, rng, scale), analysis)
        den = _diff_norm(v1, v2)
        if den == 0:
            continue
        used += 1
        ratio = _diff_norm(apply_map(v1, analysis), apply_map(v2, analysis)) / den
        if ratio > factor * (1 + 1e-6) + 1e-10:
            raise ContractionViolation(
                f"pair {i}: ratio {ratio:.6g} exceeds the certified factor {factor:.6g}",
                {"pair": i, "ratio": ratio, "seed": seed},
            )
        worst = max(worst, ratio)
    return ContractionProbe(worst, factor, used)

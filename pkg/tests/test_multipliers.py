from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from idesolve import EquationSpec, NonlinearityModel, ProblemSpec, RealLine, \
    SolvabilityViolation, compute_bounds, contraction_certificate, eval_multiplier, \
    multiplier_table, spectral_profile
from idesolve.kernels import required_special_points
from idesolve.multipliers import window_half_width
from idesolve.problem import classify_equation
from idesolve.profiles import gaussian, hermite_gaussian, odd_gaussian


def _problem(eq, kernel, domain):
    return ProblemSpec(domain, (eq,), (kernel,), NonlinearityModel.affine([[0.0]]))


def _spectra(problem):
    return [spectral_profile(g, problem.domain, required_special_points(eq, t))
            for g, eq, t in zip(problem.kernels, problem.equations, problem.tags)]


def _dense_bound(mfun, lo=-40.0, hi=40.0, step=1e-3):
    p = np.arange(lo, hi + step, step)
    m = np.abs(mfun(p))
    return float(max(np.max(m), np.max(p * p * m)))


LINE = RealLine(32.0, 1024)


def test_multiplier_at_zero_is_minus_one_over_a():
    eq = EquationSpec(1.0, 1.0)
    ks = spectral_profile(gaussian()(LINE.x), LINE, [0.0])
    assert eval_multiplier(eq, ks, 0.0) == pytest.approx(-1.0, abs=1e-12)


def test_r_b_limit_at_zero():
    eq = EquationSpec(0.0, 1.0)
    ks = spectral_profile(odd_gaussian()(LINE.x), LINE, [0.0])
    assert eval_multiplier(eq, ks, 0.0) == pytest.approx(1.0, abs=1e-12)
    # oracle: the plain quotient at a small frequency, exact transform -i p exp(-p^2/2)
    p = 1e-4
    direct = (-1j * p * math.exp(-p * p / 2)) / (p * (p - 1j))
    assert eval_multiplier(eq, ks, p) == pytest.approx(direct, abs=1e-8)
    assert abs(eval_multiplier(eq, ks, 0.0) - direct) <= 2e-4


def test_unsolvable_combination_raises():
    ks = spectral_profile(gaussian()(LINE.x), LINE, [0.0])
    with pytest.raises(SolvabilityViolation) as err:
        eval_multiplier(EquationSpec(0.0, 1.0), ks, 0.5)
    assert "or1" in err.value.conditions


def test_gaussian_drift_bound_matches_dense_oracle():
    problem = _problem(EquationSpec(1.0, 1.0), gaussian(), LINE)
    bounds = compute_bounds(problem, _spectra(problem))
    oracle = _dense_bound(lambda p: np.exp(-p**2 / 2) / (p**2 - 1 - 1j * p))
    assert oracle == pytest.approx(1.0, abs=1e-12)
    assert bounds.drift_group == pytest.approx(oracle, rel=5e-3)
    assert bounds.nodrift_group == 0.0
    # the |p^2 m| part peaks at p = +-1 with value exp(-1/2); p = 1 is off the grid
    p = LINE.frequencies
    m = multiplier_table(problem, _spectra(problem)).values[0]
    assert np.max(p * p * np.abs(m)) == pytest.approx(math.exp(-0.5), rel=5e-3)
    assert np.max(p * p * np.abs(m)) <= math.exp(-0.5)


def test_periodic_cosine_bound(manufactured):
    problem, _ = manufactured
    bounds = compute_bounds(problem, _spectra(problem))
    assert bounds.q == pytest.approx(math.sqrt(math.pi / 2) / math.sqrt(2), rel=1e-12)


def test_zero_kernel_bound_zero():
    problem = _problem(EquationSpec(1.0, 1.0), lambda x: 0 * x, LINE)
    assert compute_bounds(problem, _spectra(problem)).q == 0.0


def test_certificate_arithmetic():
    c = contraction_certificate(0.886, 0.2)
    assert c.factor == pytest.approx(0.628, abs=1e-3) and c.passed and c.status == "certified"
    c = contraction_certificate(1.0, 0.3)
    assert c.factor == pytest.approx(1.063, abs=1e-3) and not c.passed and c.status == "failed"
    c = contraction_certificate(2.0, 0.0)
    assert c.factor == 0.0 and c.passed
    c = contraction_certificate(1.0, 0.97 / (2 * math.sqrt(math.pi)))
    assert c.passed and c.status == "uncertified-convergent"


@pytest.mark.parametrize("eq, kernel, exact", [
    # R-b: odd Gaussian, transform -i p e^{-p^2/2}
    (EquationSpec(0.0, 1.0), odd_gaussian(),
     lambda p: -1j * p * np.exp(-p**2 / 2) / (p**2 - 1j * p)),
    # R-c: -x^2 e^{-x^2/2}, transform (p^2 - 1) e^{-p^2/2}
    (EquationSpec(1.0), hermite_gaussian([0, 0, -1]),
     lambda p: np.exp(-p**2 / 2) + 0j),
    # R-d: (1 - x^2) e^{-x^2/2}, transform p^2 e^{-p^2/2}
    (EquationSpec(0.0), hermite_gaussian([1, 0, -1]),
     lambda p: np.exp(-p**2 / 2) + 0j),
])
def test_singular_cases_against_closed_form(eq, kernel, exact):
    problem = _problem(eq, kernel, LINE)
    table = multiplier_table(problem, _spectra(problem))
    p = table.frequencies
    with np.errstate(all="ignore"):
        ref = exact(p)
    ok = np.isfinite(ref)
    assert np.max(np.abs(table.values[0][ok] - ref[ok])) <= 1e-9
    if eq.has_drift:
        # p = 0 lies on the grid; the exact limit there is 1
        assert table.values[0][p == 0][0] == pytest.approx(1.0, abs=1e-12)


def test_subtraction_agrees_with_direct_quotient_off_centre():
    eq = EquationSpec(1.0)
    problem = _problem(eq, hermite_gaussian([0, 0, -1]), LINE)
    spectra = _spectra(problem)
    table = multiplier_table(problem, spectra)
    p = table.frequencies
    delta = window_half_width(eq, classify_equation(eq, LINE))
    inner = (np.abs(np.abs(p) - 1) < delta) & (np.abs(np.abs(p) - 1) > 0.05)
    direct = spectra[0].spectrum[inner] / (p[inner] ** 2 - 1)
    assert np.max(np.abs(table.values[0][inner] - direct) / np.abs(direct)) <= 1e-7


@pytest.mark.parametrize("eq, kernel", [
    (EquationSpec(1.0, 1.0), gaussian()),
    (EquationSpec(0.0, 1.0), odd_gaussian()),
    (EquationSpec(1.0), hermite_gaussian([0, 0, -1])),
    (EquationSpec(0.0), hermite_gaussian([1, 0, -1])),
])
def test_refinement_stability(eq, kernel):
    q = []
    for m in (512, 1024):
        problem = _problem(eq, kernel, RealLine(16.0, m))
        q.append(compute_bounds(problem, _spectra(problem)).q)
    assert abs(q[1] - q[0]) <= 0.01 * q[1]


@settings(max_examples=15, deadline=None)
@given(alpha=st.one_of(st.floats(0.01, 100), st.floats(-100, -0.01)))
def test_bounds_scale_linearly(alpha):
    grid = RealLine(16.0, 256)
    base = _problem(EquationSpec(1.0, 1.0), gaussian(), grid)
    scaled = _problem(EquationSpec(1.0, 1.0), lambda x: alpha * gaussian()(x), grid)
    q0 = compute_bounds(base, _spectra(base)).q
    q1 = compute_bounds(scaled, _spectra(scaled)).q
    assert q1 == pytest.approx(abs(alpha) * q0, rel=1e-12)


@pytest.mark.parametrize("eq, kernel", [
    (EquationSpec(1.0, 1.0), gaussian()),
    (EquationSpec(0.0, 2.0), odd_gaussian()),
    (EquationSpec(3.0, -0.5), gaussian(width=0.5)),
])
def test_drift_term_bounded_by_kernel_scale(eq, kernel):
    problem = _problem(eq, kernel, LINE)
    spectra = _spectra(problem)
    table = multiplier_table(problem, spectra)
    lhs = np.abs(table.frequencies * table.values[0] * eq.drift)
    assert np.max(lhs) <= spectra[0].scale * (1 + 1e-10)

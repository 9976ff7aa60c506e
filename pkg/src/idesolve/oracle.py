"""Physical-space checks that share nothing with the spectral pipeline.

Derivatives use fourth-order centred differences and convolutions use an
O(M^2) composite Simpson sum, so agreement with the spectral fixed point is
an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import GridMismatch, GridTooCoarse
from .fourier import SQRT_2PI, VectorField
from .kernels import simpson_weights
from .nonlinearity import NonlinearityModel
from .problem import DomainSpec, EquationSpec, PeriodicInterval, ProblemSpec

MIN_POINTS = 9
ORDER_NOTE = "4th-order centred differences, composite Simpson convolution"


def fd_derivatives(u: np.ndarray, h: float, periodic: bool) -> tuple[np.ndarray, np.ndarray, slice]:
    """First and second derivatives of the rows of ``u`` by five-point stencils.

    Returns (u', u'', interior) where ``interior`` selects the columns the
    stencil covers: all of them on the periodic grid, two fewer at each end
    otherwise.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    m = u.shape[-1]
    if m < MIN_POINTS:
        raise GridTooCoarse(f"need at least {MIN_POINTS} grid points, got {m}")
    if periodic:
        p1, p2 = np.roll(u, -1, axis=-1), np.roll(u, -2, axis=-1)
        m1, m2 = np.roll(u, 1, axis=-1), np.roll(u, 2, axis=-1)
        c = u
        interior = slice(0, m)
    else:
        p1, p2 = u[:, 3:m - 1], u[:, 4:]
        m1, m2 = u[:, 1:m - 3], u[:, :m - 4]
        c = u[:, 2:m - 2]
        interior = slice(2, m - 2)
    d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h)
    d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h)
    return d1, d2, interior


def _shift_index(domain: DomainSpec) -> tuple[np.ndarray, np.ndarray]:
    m = domain.grid_points
    diff = np.subtract.outer(np.arange(m), np.arange(m))
    if domain.periodic:
        return diff % m, np.ones((m, m), dtype=bool)
    # x_i - x_j = (i - j) h sits at kernel index (i - j) + M/2
    idx = diff + m // 2
    valid = (idx >= 0) & (idx < m)
    return np.where(valid, idx, 0), valid


def direct_convolution(g, f, domain: DomainSpec) -> np.ndarray:
    """(G * f)(x_i) = sum_j w_j G(x_i - x_j) f(x_j) over the box or the period.

    ``f`` may hold one row per component; the same kernel is applied to each.
    On the real line kernel values outside the box are taken as zero.
    """
    g = np.asarray(g, dtype=float)
    f = np.asarray(f, dtype=float)
    m = domain.grid_points
    if g.shape != (m,) or f.shape[-1] != m:
        raise GridMismatch(f"kernel {g.shape} and field {f.shape} do not match M={m}")
    idx, valid = _shift_index(domain)
    matrix = np.where(valid, g[idx], 0.0)
    w = simpson_weights(m, domain.step)
    return (f * w) @ matrix.T


@dataclass(frozen=True)
class ResidualReport:
    """Residual r_k = u_k'' + b_k u_k' + a_k u_k + G_k * F_k(u) on stencil-interior points."""

    l2: tuple[float, ...]
    sup: tuple[float, ...]
    points: int
    truncated: bool
    note: str = ORDER_NOTE

    @property
    def total_l2(self) -> float:
        return math.sqrt(sum(v * v for v in self.l2))

    def as_dict(self) -> dict:
        return {
            "l2": list(self.l2),
            "sup": list(self.sup),
            "total_l2": self.total_l2,
            "points": self.points,
            "truncated": self.truncated,
            "note": self.note,
        }


def residual_physical(u, problem: ProblemSpec) -> ResidualReport:
    """Residual of the original system at ``u`` (a VectorField or an (N, M) array)."""
    domain = problem.domain
    samples = np.atleast_2d(np.asarray(u.physical if isinstance(u, VectorField) else u,
                                       dtype=float))
    if samples.shape != (problem.n_equations, domain.grid_points):
        raise GridMismatch(
            f"solution has shape {samples.shape}, expected "
            f"{(problem.n_equations, domain.grid_points)}"
        )
    d1, d2, interior = fd_derivatives(samples, domain.step, domain.periodic)
    forcing = np.asarray(problem.nonlinearity(samples, domain.x), dtype=float)
    l2, sup = [], []
    for k, (eq, g) in enumerate(zip(problem.equations, problem.kernels)):
        conv = direct_convolution(g, forcing[k], domain)[interior]
        r = d2[k] + eq.drift * d1[k] + eq.a * samples[k, interior] + conv
        l2.append(math.sqrt(float(np.sum(r * r)) * domain.step))
        sup.append(float(np.max(np.abs(r))))
    truncated = bool(isinstance(u, VectorField) and u.truncated)
    return ResidualReport(tuple(l2), tuple(sup), int(d2.shape[-1]), truncated)


def riemann_coefficients(g, modes: Iterable[int]) -> np.ndarray:
    """Simpson values of int_0^{2 pi} G(x) exp(-i n x) dx / sqrt(2 pi) from M uniform samples."""
    g = np.asarray(g, dtype=float)
    m = g.size
    h = 2.0 * math.pi / m
    x = h * np.arange(m)
    w = simpson_weights(m, h)
    modes = np.asarray(list(modes), dtype=float)
    return (np.exp(-1j * np.outer(modes, x)) @ (w * g)) / SQRT_2PI


def manufactured_case(coupling: float = 0.0, n_max: int = 64,
                      grid_points: int = 512) -> tuple[ProblemSpec, VectorField]:
    """Periodic single equation u'' + u' + G * F(u) = 0 with a known solution.

    G = cos x and F(u, y) = coupling * u + (cos y + sin y) / pi. For zero
    coupling the solution is u = cos x. Otherwise the only active modes are
    n = +-1 and u_1 = pi g_1 / (1 - i - pi * coupling), g_1 the coefficient
    of the forcing.
    """
    domain = PeriodicInterval(n_max, grid_points)

    def forcing(y):
        return (np.cos(y) + np.sin(y)) / math.pi

    model = NonlinearityModel.affine([[coupling]], [forcing])
    problem = ProblemSpec(domain, (EquationSpec(0.0, 1.0),), (np.cos,), model,
                          name=f"manufactured (coupling {coupling:g})")
    g1 = SQRT_2PI * (1 - 1j) / (2.0 * math.pi)
    u1 = math.pi * g1 / (1 - 1j - math.pi * coupling)
    spec = np.zeros((1, domain.spectrum_size), dtype=complex)
    spec[0, n_max + 1] = u1
    spec[0, n_max - 1] = np.conj(u1)
    return problem, VectorField.from_spectra(domain, spec)

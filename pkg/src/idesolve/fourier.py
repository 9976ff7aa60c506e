"""Discrete unitary Fourier transforms and spectral H^2 norms.

Conventions follow the 1/sqrt(2*pi) normalisation on both domains:

    real line:  f^(p) = (2*pi)^(-1/2) * int f(x) exp(-i p x) dx
    interval:   f_n   = (2*pi)^(-1/2) * int_0^{2 pi} f(x) exp(-i n x) dx

On the real line the integral is a rectangle rule over [-X, X) evaluated with
an FFT; the frequency grid has spacing pi/X, which makes the discrete pair
exactly unitary (discrete Parseval holds to rounding). Spectra are stored in
ascending frequency order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GridMismatch, NonRealResult
from .problem import DomainSpec

SQRT_2PI = math.sqrt(2.0 * math.pi)
EDGE_FRACTION = 0.05
EDGE_REL_TOL = 1e-12
IMAG_REL_TOL = 1e-10


def _alternating(m: int) -> np.ndarray:
    # exp(i p_j X) = (-1)^j for p_j = j*pi/X
    j = np.arange(-m // 2, m // 2)
    return np.where(j % 2 == 0, 1.0, -1.0)


def forward_transform(f, domain: DomainSpec) -> np.ndarray:
    """Spectrum of real or complex samples ``f`` on ``domain``'s grid.

    Accepts a 1-D array of samples or a 2-D array with one row per component.
    """
    f = np.asarray(f)
    m = domain.grid_points
    if f.shape[-1] != m:
        raise GridMismatch(f"expected {m} samples, got {f.shape[-1]}")
    raw = np.fft.fft(f, axis=-1)
    if domain.periodic:
        n = np.arange(-domain.n_max, domain.n_max + 1)
        return (SQRT_2PI / m) * raw[..., n % m]
    return (domain.step / SQRT_2PI) * _alternating(m) * np.fft.fftshift(raw, axes=-1)


def _imag_tolerance(spectrum: np.ndarray, domain: DomainSpec) -> np.ndarray:
    # largest magnitude the inverse sum can reach, per component
    peak = np.max(np.abs(spectrum), axis=-1)
    weight = domain.frequency_step * spectrum.shape[-1] / SQRT_2PI
    return IMAG_REL_TOL * peak * max(weight, 1.0)


def inverse_transform(spectrum, domain: DomainSpec, real: bool = True) -> np.ndarray:
    """Physical samples from a spectrum.

    With ``real=True`` the imaginary residue is checked against
    1e-10 times the largest value the inverse sum could produce and then
    discarded; exceeding it raises :class:`NonRealResult`.
    """
    spectrum = np.asarray(spectrum, dtype=complex)
    size = domain.spectrum_size
    if spectrum.shape[-1] != size:
        raise GridMismatch(f"expected {size} spectral entries, got {spectrum.shape[-1]}")
    m = domain.grid_points
    if domain.periodic:
        full = np.zeros(spectrum.shape[:-1] + (m,), dtype=complex)
        n = np.arange(-domain.n_max, domain.n_max + 1)
        full[..., n % m] = spectrum
        out = (m / SQRT_2PI) * np.fft.ifft(full, axis=-1)
    else:
        shifted = np.fft.ifftshift(_alternating(m) * spectrum, axes=-1)
        out = (domain.frequency_step * m / SQRT_2PI) * np.fft.ifft(shifted, axis=-1)
    if not real:
        return out
    residue = np.max(np.abs(out.imag), axis=-1)
    tol = _imag_tolerance(spectrum, domain)
    if np.any(residue > tol):
        worst = float(np.max(residue))
        raise NonRealResult(
            f"imaginary residue {worst:.3e} exceeds tolerance; spectrum is not conjugate-symmetric"
        )
    return out.real.copy()


def edge_mass_exceeded(samples: np.ndarray, domain: DomainSpec) -> bool:
    """True when a real-line field is not negligible on the outer 5% of the box."""
    if domain.periodic:
        return False
    samples = np.atleast_2d(samples)
    peak = np.max(np.abs(samples))
    if peak == 0:
        return False
    edge = np.abs(domain.x) >= (1.0 - EDGE_FRACTION) * domain.half_width
    return bool(np.max(np.abs(samples[:, edge])) > EDGE_REL_TOL * peak)


@dataclass(frozen=True)
class SpectralField:
    """One scalar field held as paired physical samples and spectrum."""

    domain: DomainSpec
    physical: np.ndarray
    spectrum: np.ndarray
    truncated: bool = False

    @classmethod
    def from_samples(cls, domain: DomainSpec, samples) -> "SpectralField":
        samples = np.asarray(samples, dtype=float)
        return cls(domain, samples, forward_transform(samples, domain),
                   edge_mass_exceeded(samples, domain))

    @classmethod
    def from_spectrum(cls, domain: DomainSpec, spectrum) -> "SpectralField":
        spectrum = np.asarray(spectrum, dtype=complex)
        physical = inverse_transform(spectrum, domain)
        return cls(domain, physical, spectrum, edge_mass_exceeded(physical, domain))


@dataclass(frozen=True)
class VectorField:
    """N scalar fields on a shared grid; arrays have one row per component."""

    domain: DomainSpec
    physical: np.ndarray
    spectrum: np.ndarray
    truncated: bool = False

    @classmethod
    def from_samples(cls, domain: DomainSpec, samples) -> "VectorField":
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        return cls(domain, samples, forward_transform(samples, domain),
                   edge_mass_exceeded(samples, domain))

    @classmethod
    def from_spectra(cls, domain: DomainSpec, spectra) -> "VectorField":
        spectra = np.atleast_2d(np.asarray(spectra, dtype=complex))
        physical = inverse_transform(spectra, domain)
        return cls(domain, physical, spectra, edge_mass_exceeded(physical, domain))

    @classmethod
    def from_components(cls, components: Sequence[SpectralField]) -> "VectorField":
        domain = components[0].domain
        if any(c.domain != domain for c in components):
            raise GridMismatch("components live on different grids")
        return cls(domain,
                   np.stack([c.physical for c in components]),
                   np.stack([c.spectrum for c in components]),
                   any(c.truncated for c in components))

    @classmethod
    def zeros(cls, domain: DomainSpec, n: int) -> "VectorField":
        return cls(domain, np.zeros((n, domain.grid_points)),
                   np.zeros((n, domain.spectrum_size), dtype=complex))

    @property
    def n_components(self) -> int:
        return self.physical.shape[0]

    @property
    def components(self) -> tuple[SpectralField, ...]:
        return tuple(
            SpectralField(self.domain, self.physical[k], self.spectrum[k], self.truncated)
            for k in range(self.n_components)
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        if other.domain != self.domain:
            raise GridMismatch("fields live on different grids")
        return VectorField(self.domain, self.physical - other.physical,
                           self.spectrum - other.spectrum, self.truncated or other.truncated)


def h2_norm_spectra(spectra, domain: DomainSpec) -> float:
    """sqrt(sum_k int (1 + p^4) |u_k^(p)|^2 dp), the L^2 + second-derivative norm."""
    spectra = np.atleast_2d(spectra)
    if spectra.shape[-1] != domain.spectrum_size:
        raise GridMismatch(
            f"expected {domain.spectrum_size} spectral entries, got {spectra.shape[-1]}"
        )
    p = domain.frequencies
    weight = (1.0 + p**4) * domain.frequency_step
    return math.sqrt(float(np.sum(weight * np.abs(spectra) ** 2)))


def h2_norm(u) -> float:
    """H^2 norm of a :class:`VectorField` or :class:`SpectralField`, computed spectrally."""
    return h2_norm_spectra(u.spectrum, u.domain)


def l2_norm_spectra(spectra, domain: DomainSpec) -> float:
    spectra = np.atleast_2d(spectra)
    return math.sqrt(float(np.sum(np.abs(spectra) ** 2)) * domain.frequency_step)


def plancherel_gap(f: SpectralField, eps: float = 1e-300) -> float:
    """Relative gap between the physical and spectral squared L^2 norms."""
    phys = float(np.sum(np.abs(f.physical) ** 2)) * f.domain.step
    spec = l2_norm_spectra(f.spectrum, f.domain) ** 2
    return abs(phys - spec) / max(phys, eps)

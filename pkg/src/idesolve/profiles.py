"""Named function families for kernels and forcing profiles in configs."""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

Profile = Callable[[np.ndarray], np.ndarray]


def gaussian(amplitude: float = 1.0, width: float = 1.0, center: float = 0.0) -> Profile:
    """amplitude * exp(-(x - center)^2 / (2 width^2))."""
    if width <= 0:
        raise ValueError("width must be positive")

    def f(x):
        return amplitude * np.exp(-0.5 * ((np.asarray(x, dtype=float) - center) / width) ** 2)

    return f


def odd_gaussian(amplitude: float = 1.0, width: float = 1.0) -> Profile:
    """amplitude * x * exp(-x^2 / (2 width^2)); zero mass, nonzero dipole."""
    if width <= 0:
        raise ValueError("width must be positive")

    def f(x):
        x = np.asarray(x, dtype=float)
        return amplitude * x * np.exp(-0.5 * (x / width) ** 2)

    return f


def hermite_gaussian(coefficients, width: float = 1.0) -> Profile:
    """Polynomial sum_j c_j x^j times exp(-x^2 / (2 width^2))."""
    if width <= 0:
        raise ValueError("width must be positive")
    coeffs = [float(c) for c in coefficients]

    def f(x):
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, coeffs) * np.exp(-0.5 * (x / width) ** 2)

    return f


def cosine(amplitude: float = 1.0, mode: float = 1.0, phase: float = 0.0) -> Profile:
    """amplitude * cos(mode * x + phase)."""

    def f(x):
        return amplitude * np.cos(mode * np.asarray(x, dtype=float) + phase)

    return f


def constant(value: float = 0.0) -> Profile:
    def f(x):
        return np.full(np.shape(x), float(value))

    return f


def tabulated(nodes, values) -> Profile:
    """Piecewise-linear interpolation, zero outside the nodes."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.shape != values.shape or nodes.size < 2:
        raise ValueError("tabulated profile needs matching nodes and values (at least 2)")
    if np.any(np.diff(nodes) <= 0):
        raise ValueError("nodes must be strictly increasing")

    def f(x):
        return np.interp(np.asarray(x, dtype=float), nodes, values, left=0.0, right=0.0)

    return f


FAMILIES: dict[str, Callable[..., Profile]] = {
    "gaussian": gaussian,
    "odd-gaussian": odd_gaussian,
    "hermite-gaussian": hermite_gaussian,
    "cosine": cosine,
    "constant": constant,
    "tabulated": tabulated,
}


def make_profile(spec: Mapping) -> Profile:
    """Build a profile from {"family": name, "params": {...}}.

    The family "sum" takes {"terms": [spec, ...]} and adds the terms; "zero"
    takes no parameters.
    """
    family = spec.get("family")
    params = dict(spec.get("params", {}))
    if family == "zero":
        return constant(0.0)
    if family == "sum":
        terms = [make_profile(t) for t in params.get("terms", [])]
        if not terms:
            raise ValueError("sum profile needs at least one term")

        def f(x):
            return sum(t(x) for t in terms)

        return f
    if family not in FAMILIES:
        known = ", ".join(sorted([*FAMILIES, "sum", "zero"]))
        raise ValueError(f"unknown profile family {family!r} (known: {known})")
    try:
        return FAMILIES[family](**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {family}: {exc}") from None


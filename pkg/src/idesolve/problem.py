"""Problem description: domains, equation constants, case tags and constraints.

A system has N equations. Equation k reads

    u_k'' + b_k u_k' + a_k u_k + int G_k(x - y) F_k(u(y), y) dy = 0

on either the whole real line (discretised on a symmetric box) or on the
periodic interval [0, 2*pi]. Equations carrying a drift coefficient ``b`` form
the drift group; the rest form the drift-free group.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Sequence, Union

import numpy as np

from .errors import AmbiguousCase

if TYPE_CHECKING:
    from .nonlinearity import NonlinearityModel

RESONANCE_TOL = 1e-9


@dataclass(frozen=True)
class RealLine:
    """Whole real line, truncated to the box [-half_width, half_width)."""

    half_width: float
    grid_points: int

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        m = self.grid_points
        if m < 16 or m % 2 or m & (m - 1):
            raise ValueError(f"grid_points must be a power of two >= 16, got {m}")

    periodic = False

    @property
    def step(self) -> float:
        return 2.0 * self.half_width / self.grid_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.step * np.arange(self.grid_points)

    @property
    def frequency_step(self) -> float:
        return math.pi / self.half_width

    @property
    def frequencies(self) -> np.ndarray:
        """Frequency grid p_j = j*pi/X for j = -M/2 .. M/2-1, ascending."""
        m = self.grid_points
        return self.frequency_step * np.arange(-m // 2, m // 2)

    @property
    def spectrum_size(self) -> int:
        return self.grid_points

    def describe(self) -> str:
        return f"real-line X={self.half_width:g} M={self.grid_points}"


@dataclass(frozen=True)
class PeriodicInterval:
    """The interval I = [0, 2*pi] with periodic boundary conditions.

    Fourier coefficients are kept for |n| <= n_max; physical samples live on
    ``grid_points`` uniform nodes (default 8*n_max) so that products formed in
    physical space alias only far above the retained band.
    """

    n_max: int
    grid_points: int | None = None

    def __post_init__(self):
        if self.n_max < 8:
            raise ValueError(f"n_max must be >= 8, got {self.n_max}")
        if self.grid_points is None:
            object.__setattr__(self, "grid_points", 8 * self.n_max)
        m = self.grid_points
        if m % 2 or m < 2 * self.n_max + 2:
            raise ValueError(
                f"grid_points must be even and >= 2*n_max + 2, got {m} for n_max={self.n_max}"
            )

    periodic = True
    length = 2.0 * math.pi

    @property
    def step(self) -> float:
        return self.length / self.grid_points

    @property
    def x(self) -> np.ndarray:
        return self.step * np.arange(self.grid_points)

    @property
    def frequency_step(self) -> float:
        return 1.0

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1, dtype=float)

    @property
    def spectrum_size(self) -> int:
        return 2 * self.n_max + 1

    def describe(self) -> str:
        return f"periodic n_max={self.n_max} M={self.grid_points}"


DomainSpec = Union[RealLine, PeriodicInterval]


@dataclass(frozen=True)
class EquationSpec:
    """Constants of one equation.

    ``b`` is None for drift-free equations. ``resonant_mode`` declares
    a = n_k**2 on the periodic interval; a value within 1e-9 of n_k**2 is
    snapped to it exactly.
    """

    a: float
    b: float | None = None
    resonant_mode: int | None = None

    def __post_init__(self):
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise ValueError(f"a must be finite and nonnegative, got {self.a}")
        if self.b is not None and (self.b == 0 or not math.isfinite(self.b)):
            raise ValueError("drift coefficient b must be finite and nonzero when present")
        if self.resonant_mode is not None:
            n = self.resonant_mode
            if n < 1 or int(n) != n:
                raise ValueError(f"resonant_mode must be a positive integer, got {n}")
            if self.b is not None:
                raise ValueError("resonant_mode requires a drift-free equation")
            if abs(self.a - n * n) > RESONANCE_TOL:
                raise ValueError(f"resonant_mode={n} requires a = {n * n}, got {self.a}")
            object.__setattr__(self, "resonant_mode", int(n))
            object.__setattr__(self, "a", float(n * n))

    @property
    def has_drift(self) -> bool:
        return self.b is not None

    @property
    def drift(self) -> float:
        return 0.0 if self.b is None else float(self.b)


class CaseTag(enum.Enum):
    R_A = "R-a"  # a > 0, drift
    R_B = "R-b"  # a = 0, drift
    R_C = "R-c"  # a > 0, no drift
    R_D = "R-d"  # a = 0, no drift
    I_A = "I-a"  # a > 0, drift
    I_B = "I-b"  # a = 0, drift
    I_C = "I-c"  # a > 0, a != n^2, no drift
    I_D = "I-d"  # a = n_k^2, no drift
    I_E = "I-e"  # a = 0, no drift

    def __str__(self) -> str:
        return self.value


REAL_LINE_ORDER = (CaseTag.R_A, CaseTag.R_B, CaseTag.R_C, CaseTag.R_D)
PERIODIC_ORDER = (CaseTag.I_A, CaseTag.I_B, CaseTag.I_C, CaseTag.I_D, CaseTag.I_E)


def resonant_index(eq: EquationSpec) -> int | None:
    """n_k for an equation in case I-d, else None."""
    if eq.resonant_mode is not None:
        return eq.resonant_mode
    if eq.b is None and eq.a > 0:
        n = round(math.sqrt(eq.a))
        if n * n == eq.a:
            return n
    return None


def classify_equation(eq: EquationSpec, domain: DomainSpec) -> CaseTag:
    if not domain.periodic:
        if eq.has_drift:
            return CaseTag.R_A if eq.a > 0 else CaseTag.R_B
        return CaseTag.R_C if eq.a > 0 else CaseTag.R_D
    if eq.has_drift:
        return CaseTag.I_A if eq.a > 0 else CaseTag.I_B
    if eq.a == 0:
        return CaseTag.I_E
    if resonant_index(eq) is not None:
        return CaseTag.I_D
    n = round(math.sqrt(eq.a))
    if abs(eq.a - n * n) <= RESONANCE_TOL:
        raise AmbiguousCase(
            f"a={eq.a!r} is within {RESONANCE_TOL:g} of {n}^2 but not equal; "
            "declare resonant_mode or move a away from the resonance"
        )
    return CaseTag.I_C


def constrained_modes(tag: CaseTag, eq: EquationSpec) -> frozenset[int]:
    """Fourier modes forced to zero for one equation."""
    if tag in (CaseTag.I_B, CaseTag.I_E):
        return frozenset({0})
    if tag is CaseTag.I_D:
        n = resonant_index(eq)
        return frozenset({n, -n})
    return frozenset()


@dataclass(frozen=True)
class ConstraintSet:
    modes: tuple[frozenset[int], ...]

    def __getitem__(self, k: int) -> frozenset[int]:
        return self.modes[k]

    def __len__(self) -> int:
        return len(self.modes)

    def mask(self, k: int, frequencies: np.ndarray) -> np.ndarray:
        """Boolean mask of constrained entries on a frequency grid."""
        out = np.zeros(frequencies.shape, dtype=bool)
        for n in self.modes[k]:
            out |= frequencies == n
        return out


Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    """Full description of one system.

    ``kernels`` may be given as callables of x or as arrays of samples on the
    domain grid; they are stored as float sample arrays.
    """

    domain: DomainSpec
    equations: tuple[EquationSpec, ...]
    kernels: tuple[np.ndarray, ...]
    nonlinearity: "NonlinearityModel"
    name: str = ""
    tags: tuple[CaseTag, ...] = field(init=False, repr=False)

    def __post_init__(self):
        equations = tuple(self.equations)
        if len(self.kernels) != len(equations):
            raise ValueError(f"{len(equations)} equations but {len(self.kernels)} kernels")
        x = self.domain.x
        samples = []
        for k, g in enumerate(self.kernels):
            arr = np.asarray(g(x) if callable(g) else g, dtype=float)
            if arr.shape == ():
                arr = np.full_like(x, float(arr))
            if arr.shape != x.shape:
                raise ValueError(f"kernel {k + 1} has shape {arr.shape}, grid has {x.shape}")
            arr.setflags(write=False)
            samples.append(arr)
        object.__setattr__(self, "equations", equations)
        object.__setattr__(self, "kernels", tuple(samples))
        object.__setattr__(
            self, "tags", tuple(classify_equation(eq, self.domain) for eq in equations)
        )

    @property
    def n_equations(self) -> int:
        return len(self.equations)

    @property
    def n_drift(self) -> int:
        return sum(eq.has_drift for eq in self.equations)


def build_constraints(spec: ProblemSpec) -> ConstraintSet:
    if not spec.domain.periodic:
        return ConstraintSet(tuple(frozenset() for _ in spec.equations))
    return ConstraintSet(
        tuple(constrained_modes(t, eq) for t, eq in zip(spec.tags, spec.equations))
    )


@dataclass(frozen=True)
class ValidationReport:
    strict: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def _ordered_case_violations(tags: Sequence[CaseTag], order: Sequence[CaseTag]) -> list[str]:
    out = []
    rank = {t: i for i, t in enumerate(order)}
    for t in order:
        if t not in tags:
            out.append(f"case {t} has no equation")
    for k in range(1, len(tags)):
        if rank[tags[k]] < rank[tags[k - 1]]:
            out.append(
                f"equation {k + 1} ({tags[k]}) follows equation {k} ({tags[k - 1]}); "
                f"cases must appear in the order {', '.join(map(str, order))}"
            )
    return out


def validate_problem(spec: ProblemSpec, strict_paper_mode: bool = False) -> ValidationReport:
    """Check the structural hypotheses of a system.

    General mode only checks per-equation consistency. Strict mode also
    requires the counts and index partition of the full mixed system:
    N >= 4 and K >= 2 on the real line, N >= 5 and K >= 2 on the interval,
    with every case class nonempty and the equations ordered by case.
    """
    violations = []
    n = spec.n_equations
    if n < 1:
        violations.append("N>=1 violated (N=0)")
    if spec.nonlinearity.n_components != n:
        violations.append(
            f"nonlinearity has {spec.nonlinearity.n_components} components, system has N={n}"
        )
    if strict_paper_mode:
        k = spec.n_drift
        n_min = 5 if spec.domain.periodic else 4
        if n < n_min:
            violations.append(f"N>={n_min} violated (N={n})")
        if k < 2:
            violations.append(f"K>=2 violated (K={k})")
        drift_flags = [eq.has_drift for eq in spec.equations]
        if any(drift_flags[k:]) or not all(drift_flags[:k]):
            violations.append("drift equations must occupy indices 1..K")
        order = PERIODIC_ORDER if spec.domain.periodic else REAL_LINE_ORDER
        violations.extend(_ordered_case_violations(spec.tags, order))
    return ValidationReport(strict=strict_paper_mode, violations=tuple(violations))

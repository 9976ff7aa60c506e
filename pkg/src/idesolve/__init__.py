"""Spectral solver for stationary nonlocal integro-differential systems.

Solves u_k'' + b_k u_k' + a_k u_k + G_k * F_k(u) = 0 on the real line or on
the periodic interval [0, 2 pi] by a certified Picard contraction in H^2.
"""

from __future__ import annotations

from .errors import IdeSolveError, AmbiguousCase, DomainError, GridMismatch, NonRealResult, \
    MissingSpecialValue, SolvabilityViolation, ConstraintInconsistency, NonFiniteValue, \
    WitnessedViolation, LipschitzViolation, GrowthViolation, PeriodicityViolation, \
    ContractionViolation, CertificateFailed, NoConvergence, GridTooCoarse, ConfigError, \
    TruncationWarning
from .fourier import SQRT_2PI, SpectralField, VectorField, forward_transform, h2_norm, \
    inverse_transform, plancherel_gap
from .kernels import KernelSpectrum, check_orthogonality, essential_spectrum, kernel_moments, \
    spectral_profile
from .multipliers import Bounds, ContractionCertificate, compute_bounds, \
    contraction_certificate, eval_multiplier, multiplier_table
from .nonlinearity import NonlinearityModel, eval_F, verify_growth, verify_lipschitz
from .oracle import direct_convolution, manufactured_case, residual_physical, \
    riemann_coefficients
from .problem import CaseTag, EquationSpec, PeriodicInterval, ProblemSpec, RealLine, \
    classify_equation, validate_problem
from .solver import Analysis, Solution, analyze, apply_map, empirical_contraction, \
    nontriviality_check, picard_solve

__version__ = "0.1.0"

from __future__ import annotations

import numpy as np
import pytest

from idesolve import EquationSpec, NonlinearityModel, ProblemSpec, RealLine
from idesolve.oracle import manufactured_case
from idesolve.profiles import gaussian


def gaussian_drift_problem(half_width: float = 32.0, grid_points: int = 2048,
                           sigma: float = 0.2) -> ProblemSpec:
    """Real-line case R-a: Gaussian kernel, a = 1, b = 1, F = sigma tanh(u) + Gaussian."""
    domain = RealLine(half_width, grid_points)
    model = NonlinearityModel.saturating([sigma], [[1.0]], [gaussian()])
    return ProblemSpec(domain, (EquationSpec(1.0, 1.0),), (gaussian(),), model,
                       name="gaussian R-a")


@pytest.fixture
def manufactured():
    return manufactured_case()


@pytest.fixture
def affine_fixture():
    return manufactured_case(coupling=0.2)


@pytest.fixture
def drift_problem():
    return gaussian_drift_problem()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

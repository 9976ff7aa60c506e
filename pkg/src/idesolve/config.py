"""JSON run configurations.

A config is one UTF-8 JSON document with three sections::

    {
      "problem": {
        "name": "...",
        "domain": "periodic" | "real-line",
        "equations": [{"a": 0, "b": 1, "kernel": {"family": "cosine"}}],
        "nonlinearity": {"family": "affine", "matrix": [[0.2]],
                         "forcing": [{"family": "cosine", "params": {...}}]}
      },
      "numerics": {"half_width": 32, "grid_points": 1024, "n_max": 64, "tol": 1e-10, ...},
      "outputs": {"directory": "out", "formats": ["csv", "json"], "residual_cadence": 5}
    }

Errors are reported as :class:`ConfigError` carrying the dotted field path
and, where it can be located, the line of the offending key.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import AmbiguousCase, ConfigError
from .nonlinearity import NonlinearityModel
from .problem import EquationSpec, PeriodicInterval, ProblemSpec, RealLine
from .profiles import make_profile

FORMATS = ("csv", "json")


@dataclass(frozen=True)
class Numerics:
    half_width: float = 32.0
    grid_points: int | None = None
    n_max: int = 64
    tol: float = 1e-10
    max_iter: int = 500
    seed: int = 0
    strict_paper_mode: bool = False
    certified_mode: bool = True
    reference_mode: bool = True
    allow_uncertified: bool = False


@dataclass(frozen=True)
class Outputs:
    directory: str = "out"
    formats: tuple[str, ...] = FORMATS
    residual_cadence: int = 5
    export_spectrum: bool = False


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    numerics: Numerics
    outputs: Outputs
    source: str = ""
    raw: dict = field(default_factory=dict, compare=False, repr=False)


class _Locator:
    """Maps dotted field paths to approximate line numbers in the source text."""

    def __init__(self, text: str):
        self.text = text

    def line(self, path: str) -> int | None:
        pos = 0
        found = None
        for part in path.split("."):
            if part.isdigit():
                continue
            m = re.compile(r'"%s"\s*:' % re.escape(part)).search(self.text, pos)
            if m is None:
                break
            pos = m.start()
            found = self.text.count("\n", 0, pos) + 1
        return found


class _Reader:
    def __init__(self, locator: _Locator):
        self.loc = locator

    def fail(self, path: str, message: str):
        raise ConfigError(message, path, self.loc.line(path))

    def get(self, obj: dict, key: str, path: str, kind, default: Any = ..., check=None):
        full = f"{path}.{key}" if path else key
        if key not in obj:
            if default is ...:
                self.fail(full, "missing required field")
            return default
        value = obj[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and not isinstance(value, kind) or \
                (kind in (int, float) and isinstance(value, bool)):
            name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            self.fail(full, f"expected {name}, got {type(value).__name__}")
        if check is not None:
            err = check(value)
            if err:
                self.fail(full, err)
        return value


def _profile(reader: _Reader, spec, path: str):
    if not isinstance(spec, dict):
        reader.fail(path, "profile must be an object with a 'family'")
    try:
        return make_profile(spec)
    except ValueError as exc:
        reader.fail(path, str(exc))


def _nonlinearity(reader: _Reader, obj: dict, n: int, path: str) -> NonlinearityModel:
    family = reader.get(obj, "family", path, str)
    forcing_specs = reader.get(obj, "forcing", path, list, None)
    forcing = None
    if forcing_specs is not None:
        if len(forcing_specs) != n:
            reader.fail(f"{path}.forcing", f"need {n} forcing profiles, got {len(forcing_specs)}")
        forcing = [_profile(reader, s, f"{path}.forcing.{i}") for i, s in enumerate(forcing_specs)]
    nonneg = lambda v: None if v >= 0 else "must be nonnegative"  # noqa: E731
    try:
        if family == "affine":
            matrix = reader.get(obj, "matrix", path, list)
            declared = reader.get(obj, "declared_L", path, float, None, nonneg)
            model = NonlinearityModel.affine(matrix, forcing, declared)
        elif family == "saturating":
            model = NonlinearityModel.saturating(
                reader.get(obj, "sigma", path, list), reader.get(obj, "directions", path, list),
                forcing, reader.get(obj, "declared_L", path, float, None, nonneg),
                reader.get(obj, "declared_K", path, float, None, nonneg))
        elif family == "tabulated":
            model = NonlinearityModel.tabulated(
                reader.get(obj, "nodes", path, list), reader.get(obj, "values", path, list),
                reader.get(obj, "directions", path, list),
                reader.get(obj, "declared_L", path, float, check=nonneg),
                reader.get(obj, "declared_K", path, float, check=nonneg), forcing)
        else:
            reader.fail(f"{path}.family",
                        f"unknown nonlinearity family {family!r} (affine, saturating, tabulated)")
    except (ValueError, TypeError) as exc:
        reader.fail(path, str(exc))
    if model.n_components != n:
        reader.fail(path, f"nonlinearity has {model.n_components} components, system has {n}")
    return model


def _numerics(reader: _Reader, obj: dict) -> Numerics:
    p = "numerics"
    pos = lambda v: None if v > 0 else "must be positive"  # noqa: E731
    return Numerics(
        half_width=reader.get(obj, "half_width", p, float, 32.0, pos),
        grid_points=reader.get(obj, "grid_points", p, int, None, pos),
        n_max=reader.get(obj, "n_max", p, int, 64, pos),
        tol=reader.get(obj, "tol", p, float, 1e-10, pos),
        max_iter=reader.get(obj, "max_iter", p, int, 500, pos),
        seed=reader.get(obj, "seed", p, int, 0,
                        lambda v: None if 0 <= v < 2**64 else "must be an unsigned 64-bit integer"),
        strict_paper_mode=reader.get(obj, "strict_paper_mode", p, bool, False),
        certified_mode=reader.get(obj, "certified_mode", p, bool, True),
        reference_mode=reader.get(obj, "reference_mode", p, bool, True),
        allow_uncertified=reader.get(obj, "allow_uncertified", p, bool, False),
    )


def _outputs(reader: _Reader, obj: dict) -> Outputs:
    p = "outputs"

    def formats_ok(v):
        if not v:
            return "formats must be nonempty"
        bad = [f for f in v if f not in FORMATS]
        return f"unknown format(s) {bad}; choose from {list(FORMATS)}" if bad else None

    return Outputs(
        directory=reader.get(obj, "directory", p, str, "out"),
        formats=tuple(reader.get(obj, "formats", p, list, list(FORMATS), formats_ok)),
        residual_cadence=reader.get(obj, "residual_cadence", p, int, 5,
                                    lambda v: None if v >= 0 else "must be >= 0"),
        export_spectrum=reader.get(obj, "export_spectrum", p, bool, False),
    )


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", None, exc.lineno) from None
    reader = _Reader(_Locator(text))
    if not isinstance(raw, dict):
        reader.fail("", "top level must be an object")
    numerics = _numerics(reader, reader.get(raw, "numerics", "", dict, {}))
    outputs = _outputs(reader, reader.get(raw, "outputs", "", dict, {}))
    prob = reader.get(raw, "problem", "", dict)

    kind = reader.get(prob, "domain", "problem", str)
    try:
        if kind == "periodic":
            domain = PeriodicInterval(numerics.n_max, numerics.grid_points)
        elif kind == "real-line":
            domain = RealLine(numerics.half_width, numerics.grid_points or 1024)
        else:
            reader.fail("problem.domain", f"unknown domain {kind!r} (periodic, real-line)")
    except ValueError as exc:
        reader.fail("numerics", str(exc))

    eq_specs = reader.get(prob, "equations", "problem", list,
                          check=lambda v: None if v else "need at least one equation")
    equations, kernels = [], []
    for i, e in enumerate(eq_specs):
        path = f"problem.equations.{i}"
        if not isinstance(e, dict):
            reader.fail(path, "equation must be an object")
        try:
            equations.append(EquationSpec(
                reader.get(e, "a", path, float),
                reader.get(e, "b", path, (int, float, type(None)), None),
                reader.get(e, "resonant_mode", path, (int, type(None)), None),
            ))
        except ValueError as exc:
            reader.fail(path, str(exc))
        kernels.append(_profile(reader, reader.get(e, "kernel", path, dict), f"{path}.kernel"))

    model = _nonlinearity(reader, reader.get(prob, "nonlinearity", "problem", dict),
                          len(equations), "problem.nonlinearity")
    try:
        problem = ProblemSpec(domain, tuple(equations), tuple(kernels), model,
                              name=reader.get(prob, "name", "problem", str, ""))
    except (ValueError, AmbiguousCase) as exc:
        reader.fail("problem", str(exc))
    return RunConfig(problem, numerics, outputs, source, raw)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, str(path))

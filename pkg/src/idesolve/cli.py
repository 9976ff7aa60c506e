"""Command-line entry point: ``idesolve check|solve|spectrum|oracle --config PATH``.

Exit codes: 0 success, 1 input error, 2 solvability or certificate failure
(including a failed audit), 3 no convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import RunConfig, load_config
from .errors import CertificateFailed, ConfigError, ConstraintInconsistency, \
    ContractionViolation, GrowthViolation, IdeSolveError, LipschitzViolation, NoConvergence, \
    PeriodicityViolation, SolvabilityViolation, TruncationWarning
from .fourier import VectorField
from .kernels import essential_spectrum
from .nonlinearity import verify_growth, verify_lipschitz
from .oracle import residual_physical
from .solver import Analysis, IterationTrace, Solution, analyze, nontriviality_check, \
    picard_solve

log = logging.getLogger("idesolve")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NOCONV = 0, 1, 2, 3
TRACE_COLUMNS = ("step", "increment_h2", "ratio", "residual_l2", "wall_ms")
AUDIT_FAILURES = (LipschitzViolation, GrowthViolation, PeriodicityViolation,
                  ContractionViolation)


def _num(v) -> str:
    return "" if v is None else repr(float(v))


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def emit_trace(trace: IterationTrace, fmt: str, path: str | Path) -> Path:
    """Write the trace as CSV or JSON with columns in :data:`TRACE_COLUMNS` order."""
    if not len(trace):
        raise ValueError("trace is empty")
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for r in trace.rows:
                w.writerow([r.step, _num(r.increment_h2), _num(r.ratio), _num(r.residual_l2),
                            _num(r.wall_ms)])
    elif fmt == "json":
        _write_json(path, [{c: getattr(r, c) for c in TRACE_COLUMNS} for r in trace.rows])
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    return path


def read_trace_csv(path: str | Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "step" else (float(v) if v else None)) for k, v in r.items()}
            for r in rows]


def write_solution_csv(u: VectorField, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"u_{k + 1}" for k in range(u.n_components)])
        for j, x in enumerate(u.domain.x):
            w.writerow([repr(float(x))] + [repr(float(v)) for v in u.physical[:, j]])


def read_solution_csv(path: str | Path, domain, n: int) -> VectorField:
    """Load x, u_1..u_N samples and check they sit on ``domain``'s grid."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read solution file {path}: {exc}") from None
    if data.shape != (domain.grid_points, n + 1):
        raise ConfigError(
            f"solution file has shape {data.shape}, expected {(domain.grid_points, n + 1)}"
        )
    if not np.allclose(data[:, 0], domain.x, rtol=0, atol=1e-9 * max(1.0, domain.step)):
        raise ConfigError("solution file x column does not match the configured grid")
    return VectorField.from_samples(domain, data[:, 1:].T)


def solvability_report(analysis: Analysis) -> dict:
    problem = analysis.problem
    eqs = []
    for k, (eq, tag, rep) in enumerate(zip(problem.equations, problem.tags,
                                           analysis.orthogonality)):
        ess = essential_spectrum(eq, problem.domain.frequencies, problem.domain)
        eqs.append({
            "equation": k + 1,
            "a": eq.a,
            "b": eq.b,
            "tag": str(tag),
            "constrained_modes": sorted(analysis.constraints[k]),
            "orthogonality": [c.as_dict() for c in rep.conditions],
            "orthogonality_passed": rep.passed,
            "essential_spectrum_min_abs": ess.min_abs,
            "fredholm": ess.fredholm,
        })
    nt = nontriviality_check(problem, analysis.spectra)
    return {
        "problem": problem.name,
        "domain": problem.domain.describe(),
        "strict_paper_mode": analysis.validation.strict,
        "hypothesis_violations": list(analysis.validation.violations),
        "solvable": analysis.solvable,
        "failed_conditions": [f"equation {k}: {name}" for k, name in analysis.failed_conditions()],
        "equations": eqs,
        "nontrivial": nt.nontrivial,
        "nontriviality_evidence": [
            {"measure": e.measure, "count": e.count,
             "top": [{"p": p, "product": v} for p, v in e.top]}
            for e in nt.per_equation
        ],
    }


def _certificate_dict(analysis: Analysis, cfg: RunConfig, audits: dict) -> dict:
    cert = analysis.certificate
    out = cert.as_dict() if cert else {"passed": False, "status": "unsolvable"}
    out["certified_mode"] = cfg.numerics.certified_mode
    out["allow_uncertified"] = cfg.numerics.allow_uncertified
    out["audits"] = audits
    return out


def _audit(cfg: RunConfig) -> dict:
    model, domain, seed = cfg.problem.nonlinearity, cfg.problem.domain, cfg.numerics.seed
    lip = verify_lipschitz(model, domain, seed=seed)
    growth = verify_growth(model, domain, seed=seed)
    return {"lipschitz_estimate": lip.estimate, "declared_L": lip.declared,
            "growth_max_excess": growth.max_excess, "periodic_checked": growth.periodic_checked}


def _certificate_verdict(analysis: Analysis, cfg: RunConfig) -> str | None:
    """Reason the run may not proceed, or None."""
    if not analysis.validation.ok:
        return "hypotheses violated: " + "; ".join(analysis.validation.violations)
    if not analysis.solvable:
        return "orthogonality failed: " + ", ".join(
            f"equation {k} {name}" for k, name in analysis.failed_conditions())
    cert = analysis.certificate
    if cfg.numerics.allow_uncertified:
        return None
    if not cert.passed:
        return f"contraction factor {cert.factor:.6g} >= 1"
    if cfg.numerics.certified_mode and cert.status != "certified":
        return f"contraction factor {cert.factor:.6g} above the certified limit 0.95"
    return None


def _prepare(cfg: RunConfig, out: Path) -> tuple[Analysis, str | None]:
    out.mkdir(parents=True, exist_ok=True)
    analysis = analyze(cfg.problem, cfg.numerics.strict_paper_mode)
    audits: dict = {}
    reason = None
    if cfg.problem.nonlinearity.requires_audit:
        try:
            audits = _audit(cfg)
        except AUDIT_FAILURES as exc:
            audits = {"failure": str(exc), "witness": exc.witness}
            reason = f"nonlinearity audit failed: {exc}"
    _write_json(out / "solvability.json", solvability_report(analysis))
    _write_json(out / "certificate.json", _certificate_dict(analysis, cfg, audits))
    return analysis, reason or _certificate_verdict(analysis, cfg)


def _cmd_check(cfg: RunConfig, out: Path) -> int:
    _, reason = _prepare(cfg, out)
    if reason:
        log.error("%s", reason)
        return EXIT_INFEASIBLE
    log.info("check passed")
    return EXIT_OK


def _write_solution(cfg: RunConfig, sol: Solution, out: Path, status: str) -> float:
    for fmt in cfg.outputs.formats:
        emit_trace(sol.trace, fmt, out / f"trace.{fmt}")
    write_solution_csv(sol.fixed_point, out / "solution.csv")
    if cfg.outputs.export_spectrum:
        _write_spectrum_export(sol.fixed_point, out / "solution_spectrum.csv")
    residual = residual_physical(sol.fixed_point, cfg.problem)
    _write_json(out / "residual.json", residual.as_dict())
    _write_json(out / "report.json", {
        "status": status,
        "steps": len(sol.trace),
        "converged": sol.converged,
        "final_increment_h2": float(sol.trace.rows[-1].increment_h2),
        "fixed_point_residual_h2": sol.fixed_point_residual,
        "a_priori_bound": sol.a_priori_bound,
        "a_posteriori_bound": sol.a_posteriori_bound,
        "certificate_status": sol.certificate.status,
        "factor": sol.certificate.factor,
        "nontrivial": sol.nontrivial,
        "residual_l2": residual.total_l2,
        "warnings": list(sol.warnings),
    })
    return residual.total_l2


def _write_spectrum_export(u: VectorField, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p"] + [f"{part}_{k + 1}" for k in range(u.n_components)
                            for part in ("re", "im")])
        for j, p in enumerate(u.domain.frequencies):
            row = [repr(float(p))]
            for k in range(u.n_components):
                z = u.spectrum[k, j]
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def _cmd_solve(cfg: RunConfig, out: Path) -> int:
    analysis, reason = _prepare(cfg, out)
    if reason:
        log.error("%s", reason)
        return EXIT_INFEASIBLE
    num = cfg.numerics
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        try:
            sol = picard_solve(cfg.problem, None, num.tol, num.max_iter, analysis=analysis,
                               residual_cadence=cfg.outputs.residual_cadence,
                               allow_uncertified=num.allow_uncertified,
                               require_certified=num.certified_mode,
                               reference_mode=num.reference_mode)
        except NoConvergence as exc:
            if exc.solution is not None:
                _write_solution(cfg, exc.solution, out, "no-convergence")
            log.error("%s", exc)
            return EXIT_NOCONV
    for w in sol.warnings:
        log.warning("%s", w)
    res = _write_solution(cfg, sol, out, "converged")
    log.info("converged in %d steps, residual L2 %.3e", len(sol.trace), res)
    return EXIT_OK


def _cmd_spectrum(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    domain = cfg.problem.domain
    rows, summary = [], []
    for k, eq in enumerate(cfg.problem.equations):
        ess = essential_spectrum(eq, domain.frequencies, domain)
        summary.append({"equation": k + 1, "min_abs": ess.min_abs, "argmin": ess.argmin,
                        "fredholm": ess.fredholm})
        rows += [(k + 1, float(p), float(v.real), float(v.imag))
                 for p, v in zip(ess.p, ess.values)]
    if "csv" in cfg.outputs.formats:
        with (out / "spectrum.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["equation", "p", "re", "im"])
            for r in rows:
                w.writerow([r[0]] + [repr(v) for v in r[1:]])
    if "json" in cfg.outputs.formats:
        _write_json(out / "spectrum.json", {
            "summary": summary,
            "curve": [{"equation": r[0], "p": r[1], "re": r[2], "im": r[3]} for r in rows],
        })
    return EXIT_OK


def _cmd_oracle(cfg: RunConfig, out: Path, solution: str | None) -> int:
    if solution is None:
        raise ConfigError("oracle needs --solution PATH")
    out.mkdir(parents=True, exist_ok=True)
    u = read_solution_csv(solution, cfg.problem.domain, cfg.problem.n_equations)
    report = residual_physical(u, cfg.problem)
    threshold = max(1e-6, 50 * cfg.numerics.tol)
    data = report.as_dict() | {"threshold": threshold, "passed": report.total_l2 <= threshold}
    _write_json(out / "residual.json", data)
    if not data["passed"]:
        log.error("residual %.3e exceeds %.3e", report.total_l2, threshold)
        return EXIT_INFEASIBLE
    return EXIT_OK


def run_config(path: str | Path, command: str = "solve", out: str | Path | None = None,
               strict: bool = False, seed: int | None = None,
               solution: str | None = None) -> int:
    """Run one subcommand on the config at ``path`` and return its exit code."""
    try:
        cfg = load_config(path)
        num = cfg.numerics
        if strict:
            num = replace(num, strict_paper_mode=True)
        if seed is not None:
            num = replace(num, seed=seed)
        cfg = replace(cfg, numerics=num)
        target = Path(out) if out is not None else Path(cfg.outputs.directory)
        if command == "check":
            return _cmd_check(cfg, target)
        if command == "solve":
            return _cmd_solve(cfg, target)
        if command == "spectrum":
            return _cmd_spectrum(cfg, target)
        if command == "oracle":
            return _cmd_oracle(cfg, target, solution)
        raise ConfigError(f"unknown command {command!r}")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_INPUT
    except (SolvabilityViolation, CertificateFailed, ConstraintInconsistency) as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    except (IdeSolveError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idesolve", description="Spectral fixed-point solver for nonlocal integro-"
        "differential systems on the real line or a periodic interval.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check": "solvability conditions and contraction certificate only",
        "solve": "full pipeline: check, iterate, audit the residual",
        "spectrum": "export the essential-spectrum curve of each equation",
        "oracle": "physical-space residual audit of a solution file",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="path to the JSON run config")
        p.add_argument("--out", help="output directory (default: outputs.directory)")
        p.add_argument("--strict", action="store_true",
                       help="enforce the full-system counting hypotheses (N, K, case order)")
        p.add_argument("--seed", type=int, help="override numerics.seed")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "oracle":
            p.add_argument("--solution", required=True, help="CSV with columns x, u_1..u_N")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("--seed must be an unsigned 64-bit integer")
        return EXIT_INPUT
    return run_config(args.config, args.command, args.out, args.strict, args.seed,
                      getattr(args, "solution", None))


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())

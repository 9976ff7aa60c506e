from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from idesolve import ConfigError
from idesolve.cli import TRACE_COLUMNS, emit_trace, main, read_trace_csv, run_config
from idesolve.config import parse_config
from idesolve.solver import picard_solve

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _load(name: str) -> dict:
    return json.loads((CONFIGS / name).read_text())


def _write(tmp_path: Path, data: dict, name: str = "cfg.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return path


def test_solve_manufactured(tmp_path):
    out = tmp_path / "out"
    assert run_config(CONFIGS / "manufactured.json", "solve", out) == 0
    data = np.loadtxt(out / "solution.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1] - np.cos(data[:, 0]))) <= 1e-10
    for name in ("solvability.json", "certificate.json", "trace.csv", "trace.json",
                 "residual.json", "report.json"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["steps"] == 1 and report["nontrivial"]


def test_check_reports_failed_mass_condition(tmp_path):
    out = tmp_path / "out"
    assert run_config(CONFIGS / "gaussian_no_mass_condition.json", "check", out) == 2
    report = json.loads((out / "solvability.json").read_text())
    assert report["failed_conditions"] == ["equation 1: or1"]
    assert report["equations"][0]["tag"] == "R-b"
    assert json.loads((out / "certificate.json").read_text())["status"] == "unsolvable"


def test_check_passes_on_real_line(tmp_path):
    assert run_config(CONFIGS / "gaussian_real_line.json", "check", tmp_path) == 0
    cert = json.loads((tmp_path / "certificate.json").read_text())
    assert cert["status"] == "certified"
    assert cert["Q"] == pytest.approx(1.0, rel=1e-9)


def test_malformed_config_exit_1(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"problem": {"domain": "periodic",\n  "equations": [}')
    assert run_config(bad, "check", tmp_path) == 1
    assert run_config(tmp_path / "missing.json", "check", tmp_path) == 1


def test_config_error_locates_field():
    text = json.dumps(_load("manufactured.json"), indent=2).replace('"b": 1', '"b": "one"')
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.field == "problem.equations.0.b"
    assert err.value.line is not None and '"b"' in text.splitlines()[err.value.line - 1]


@pytest.mark.parametrize("patch, field", [
    ({"numerics": {"tol": -1.0}}, "numerics.tol"),
    ({"outputs": {"formats": []}}, "outputs.formats"),
    ({"outputs": {"formats": ["xml"]}}, "outputs.formats"),
    ({"numerics": {"seed": -3}}, "numerics.seed"),
])
def test_config_invariants(patch, field):
    data = _load("manufactured.json")
    for section, values in patch.items():
        data[section].update(values)
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(data))
    assert err.value.field == field


def test_unknown_family_and_domain():
    data = _load("manufactured.json")
    data["problem"]["equations"][0]["kernel"] = {"family": "bessel"}
    with pytest.raises(ConfigError, match="unknown profile family"):
        parse_config(json.dumps(data))
    data = _load("manufactured.json")
    data["problem"]["domain"] = "torus"
    with pytest.raises(ConfigError):
        parse_config(json.dumps(data))


def test_certificate_failure_exit_2(tmp_path):
    data = _load("affine_periodic.json")
    data["problem"]["nonlinearity"]["matrix"] = [[0.5]]
    assert run_config(_write(tmp_path, data), "solve", tmp_path / "o") == 2


def test_no_convergence_exit_3(tmp_path):
    data = _load("affine_periodic.json")
    data["numerics"]["max_iter"] = 3
    out = tmp_path / "o"
    assert run_config(_write(tmp_path, data), "solve", out) == 3
    assert len(read_trace_csv(out / "trace.csv")) == 3
    assert json.loads((out / "report.json").read_text())["status"] == "no-convergence"


def test_strict_flag_exit_2(tmp_path):
    assert run_config(CONFIGS / "manufactured.json", "check", tmp_path, strict=True) == 2
    report = json.loads((tmp_path / "solvability.json").read_text())
    assert "N>=5 violated (N=1)" in report["hypothesis_violations"]


def test_tabulated_audit_failure_exit_2(tmp_path):
    data = _load("gaussian_real_line.json")
    nodes = list(np.linspace(-20, 20, 81))
    data["problem"]["nonlinearity"] = {
        "family": "tabulated", "nodes": nodes, "values": [[0.2 * math.sin(v) for v in nodes]],
        "directions": [[1.0]], "declared_L": 0.1, "declared_K": 0.2,
        "forcing": [{"family": "gaussian"}],
    }
    assert run_config(_write(tmp_path, data), "check", tmp_path / "o") == 2
    cert = json.loads((tmp_path / "o" / "certificate.json").read_text())
    assert "witness" in cert["audits"]
    data["problem"]["nonlinearity"]["declared_L"] = 0.2
    assert run_config(_write(tmp_path, data), "check", tmp_path / "o2") == 0


def test_spectrum_export(tmp_path):
    assert run_config(CONFIGS / "gaussian_real_line.json", "spectrum", tmp_path) == 0
    summary = json.loads((tmp_path / "spectrum.json").read_text())["summary"][0]
    assert summary["fredholm"] and summary["min_abs"] == pytest.approx(math.sqrt(3) / 2)
    header = (tmp_path / "spectrum.csv").read_text().splitlines()[0]
    assert header == "equation,p,re,im"


def test_oracle_subcommand(tmp_path):
    assert run_config(CONFIGS / "manufactured.json", "solve", tmp_path / "s") == 0
    sol = tmp_path / "s" / "solution.csv"
    assert run_config(CONFIGS / "manufactured.json", "oracle", tmp_path / "o",
                      solution=str(sol)) == 0
    lines = sol.read_text().splitlines()
    x, u = lines[5].split(",")
    lines[5] = f"{x},{float(u) + 0.1!r}"
    sol.write_text("\n".join(lines) + "\n")
    assert run_config(CONFIGS / "manufactured.json", "oracle", tmp_path / "o",
                      solution=str(sol)) == 2
    assert run_config(CONFIGS / "gaussian_real_line.json", "oracle", tmp_path / "o",
                      solution=str(sol)) == 1


def test_emit_trace_formats_agree(tmp_path, affine_fixture):
    sol = picard_solve(affine_fixture[0], tol=1e-12)
    emit_trace(sol.trace, "csv", tmp_path / "t.csv")
    emit_trace(sol.trace, "json", tmp_path / "t.json")
    csv_rows = read_trace_csv(tmp_path / "t.csv")
    json_rows = json.loads((tmp_path / "t.json").read_text())
    assert csv_rows == json_rows
    assert list(json_rows[0]) == list(TRACE_COLUMNS)
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)
    assert json_rows[0]["ratio"] is None and all(r["ratio"] is not None for r in json_rows[1:])


def test_one_step_trace_single_row(tmp_path, manufactured):
    sol = picard_solve(manufactured[0])
    emit_trace(sol.trace, "csv", tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].split(",")[2] == ""


def test_main_argparse(tmp_path, capsys):
    assert main(["check", "--config", str(CONFIGS / "manufactured.json"),
                 "--out", str(tmp_path), "--seed", "11"]) == 0
    with pytest.raises(SystemExit):
        main(["solve"])

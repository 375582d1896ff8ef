import json
import subprocess
import sys
from pathlib import Path

import pytest

from abelreg.cli import EXIT_INPUT, EXIT_OK, EXIT_REGULARITY, fmt, main, write_outputs

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
REFERENCE_CONFIG = CONFIGS / "reference.json"
MANUFACTURED_CONFIG = CONFIGS / "manufactured.json"


def write_config(tmp_path: Path, **changes) -> Path:
    raw = json.loads(REFERENCE_CONFIG.read_text())
    for key, value in changes.items():
        if value is None:
            raw.pop(key)
        else:
            raw[key] = value
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw, indent=2))
    return path


def run(command, config, out, *extra):
    return main([command, "--config", str(config), "--out", str(out), *extra])


def test_solve_reference_summary(tmp_path):
    code = run("solve", REFERENCE_CONFIG, tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["theta_norm"] == pytest.approx(0.75, abs=1e-12)
    assert summary["representation"]["index"] == 1
    # this right-hand side has no solution in the selected class
    assert summary["residual_ok"] is False
    assert code == EXIT_REGULARITY
    assert summary["regularity"]["K_sigma"]["passed"]


def test_solve_csv_format(tmp_path):
    run("solve", REFERENCE_CONFIG, tmp_path)
    raw = (tmp_path / "solution.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,J,K_sigma,psi"
    assert len(lines) == 1 + 33
    assert all(len(line.split(",")) == 4 for line in lines[1:])
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_solve_is_deterministic(tmp_path):
    run("solve", REFERENCE_CONFIG, tmp_path / "one")
    run("solve", REFERENCE_CONFIG, tmp_path / "two")
    for name in ("solution.csv", "summary.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_solve_zero_rhs(tmp_path):
    config = write_config(tmp_path, f={"family": "zero"})
    assert run("solve", config, tmp_path / "out") == EXIT_OK
    lines = (tmp_path / "out" / "solution.csv").read_text().splitlines()[1:]
    assert all(abs(float(line.split(",")[3])) < 1e-14 for line in lines)


def test_solve_manufactured(tmp_path, capsys):
    assert run("solve", MANUFACTURED_CONFIG, tmp_path, "--json") == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "pass"
    assert summary["residual"] < 1e-9


def test_missing_key(tmp_path, capsys):
    config = write_config(tmp_path, mu=None)
    assert run("solve", config, tmp_path / "out") == EXIT_INPUT
    assert "'mu'" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_coefficients_must_sum_to_one(tmp_path, capsys):
    config = write_config(tmp_path, alpha=0.5, beta=0.4)
    assert run("verify", config, tmp_path / "out") == EXIT_INPUT
    assert "alpha + beta" in capsys.readouterr().err


def test_invalid_json_reports_position(tmp_path, capsys):
    config = tmp_path / "broken.json"
    config.write_text('{\n  "alpha": 0.5,\n  "beta": ,\n}\n')
    assert run("solve", config, tmp_path / "out") == EXIT_INPUT
    assert f"{config}:3:11:" in capsys.readouterr().err


@pytest.mark.parametrize(
    "changes, key",
    [
        ({"sigma": 1.5}, "sigma"),
        ({"f": {"family": "spline"}}, "f.family"),
        ({"interval": [1.0, 0.0]}, "interval"),
        ({"tolerances": {"bogus": 1.0}}, "tolerances.bogus"),
        ({"f": {"family": "manufactured", "q_a": 0.8}}, "f.q_b"),
    ],
)
def test_bad_values_name_the_key(tmp_path, capsys, changes, key):
    config = write_config(tmp_path, **changes)
    assert run("solve", config, tmp_path / "out") == EXIT_INPUT
    assert key in capsys.readouterr().err


def test_bad_flags(tmp_path):
    assert run("solve", REFERENCE_CONFIG, tmp_path, "--tol", "-1") == EXIT_INPUT
    assert run("solve", REFERENCE_CONFIG, tmp_path, "--grid", "1") == EXIT_INPUT


def test_verify_reference(tmp_path):
    assert run("verify", REFERENCE_CONFIG, tmp_path) == EXIT_OK
    report = json.loads((tmp_path / "verify.json").read_text())
    assert set(report["checks"]) == {
        "angle_window",
        "case_admissibility",
        "representation_equivalence",
        "left_right_identity",
        "ctilde_identity",
        "oracle_comparison",
        "manufactured_residual",
    }
    assert all(c["passed"] for c in report["checks"].values())


def test_verify_tightened_tolerance_fails(tmp_path):
    # measured discrepancies sit far below the defaults, so 100x still passes
    assert run("verify", REFERENCE_CONFIG, tmp_path / "a", "--tol", "0.01") == EXIT_OK
    assert run("verify", REFERENCE_CONFIG, tmp_path / "b", "--tol", "1e-4") == EXIT_REGULARITY
    report = json.loads((tmp_path / "b" / "verify.json").read_text())
    assert report["status"] == "fail"
    assert not report["checks"]["oracle_comparison"]["passed"]


def test_compare_manufactured(tmp_path):
    assert run("compare", MANUFACTURED_CONFIG, tmp_path) == EXIT_OK
    summary = json.loads((tmp_path / "compare.json").read_text())
    errors = [row["relative_l2_error"] for row in summary["rows"]]
    assert [row["n"] for row in summary["rows"]] == [64, 128, 256, 512]
    assert all(e1 > e2 for e1, e2 in zip(errors, errors[1:]))
    header = (tmp_path / "compare.csv").read_text().splitlines()[0]
    assert header == "n,relative_l2_error,condition_estimate"


def test_compare_reference_disagrees(tmp_path):
    assert run("compare", REFERENCE_CONFIG, tmp_path, "--grid", "64") == EXIT_REGULARITY


def test_probe(tmp_path):
    assert run("probe", MANUFACTURED_CONFIG, tmp_path) == EXIT_OK
    summary = json.loads((tmp_path / "probe.json").read_text())
    assert summary["regularity"]["J"]["passed"]


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 0.0):
        assert float(fmt(x)) == x
    assert fmt(-0.0) == "0.0"


def test_write_outputs_leaves_no_partial_files(tmp_path):
    write_outputs(tmp_path, {"a.txt": "one\n"})
    with pytest.raises(TypeError):
        write_outputs(tmp_path, {"a.txt": "two\n", "b.txt": None})
    assert (tmp_path / "a.txt").read_text() == "one\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.txt"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "abelreg", "solve", "--config", str(tmp_path / "none.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_INPUT
    assert "cannot read config" in proc.stderr

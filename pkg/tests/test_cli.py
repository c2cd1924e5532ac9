import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from subconvex.cli import COMMANDS, config_from_args, main
from subconvex.errors import ConfigError
from subconvex.forms import write_maass


def run_cli(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_unknown_command_exit_code(capsys):
    code, _, err = run_cli(["verify-nothing"], capsys)
    assert code == 2
    assert "unknown command" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "subconvex", "bogus"], capture_output=True,
                          text=True)
    assert proc.returncode == 2


def test_bad_tolerance_exit_code(capsys):
    assert run_cli(["verify-arith", "--tol", "nonsense=1"], capsys)[0] == 2
    assert run_cli(["verify-arith", "--tol", "weil"], capsys)[0] == 2
    assert run_cli(["verify-arith", "--format", "xml"], capsys)[0] == 2


def test_inadmissible_eta_exit_code(capsys):
    code, _, err = run_cli(["scan-exponent", "--eta", "0.06", "--M-max", "5"], capsys)
    assert code == 2
    assert "eta" in err


def test_verify_arith(capsys):
    code, out, err = run_cli(["verify-arith", "--seed", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    weil = [r for r in rows if r["anchor"] == "weil-bound"]
    assert len(weil) >= 50
    assert all(r["passed"] == "true" for r in rows)
    assert err.startswith("ok verify-arith")


def test_corrupted_coefficient_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    coeffs = np.r_[0.9, np.linspace(-1, 1, 99)]
    write_maass(path, 4.77, 1, 0, 1, coeffs)
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["verify-dualsum", "--coeff-file", str(path), "--out", str(out),
                          "--format", "json"], capsys)
    assert code == 1
    rec = json.loads(out.read_text())[0]
    assert rec["error"] == "NormalizationError"
    assert rec["passed"] is False


def test_config_file_merge(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 4, "format": "json", "tol": {"gauss": 1e-8},
                               "size": "quick"}))
    rc = config_from_args(["verify-characters", "--config", str(cfg), "--seed", "9",
                           "--tol", "voronoi=1e-5"])
    assert rc.seed == 9
    assert rc.format == "json"
    assert rc.size == "quick"
    assert rc.tolerances == {"gauss": 1e-8, "voronoi": 1e-5}


def test_config_file_errors(tmp_path):
    bad = tmp_path / "c.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        config_from_args(["verify-arith", "--config", str(bad)])
    with pytest.raises(ConfigError):
        config_from_args(["verify-arith", "--config", str(tmp_path / "missing.json")])


def test_json_output(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(["verify-characters", "--size", "quick", "--format", "json", "--out",
                          str(out)], capsys)
    assert code == 0
    data = json.loads(out.read_text())
    assert data and all(r["passed"] is True for r in data)


def test_failing_tolerance_exit_code(capsys):
    # A negative tolerance cannot be met by any record.
    code, _, err = run_cli(["verify-characters", "--size", "quick", "--tol", "gauss=-1"], capsys)
    assert code == 1
    assert err.startswith("FAILED")


def test_repeat_runs_identical(tmp_path, capsys):
    paths = []
    for i in range(2):
        p = tmp_path / f"r{i}.csv"
        assert run_cli(["verify-arith", "--size", "quick", "--seed", "3", "--out", str(p)],
                       capsys)[0] == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_command_list():
    assert "scan-exponent" in COMMANDS
    assert "verify-arith" in COMMANDS

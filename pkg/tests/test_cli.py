import os
import subprocess
import sys
import time

import pytest

from relmech.cli import main
from relmech.scenario import shipped_config

MERCURY = ["--GM", "1.32712440018e20", "--a", "5.7909e10", "--e", "0.20563"]


def pairs(text):
    out = {}
    for line in text.splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.strip()
    return out


def test_precession_closed_form(capsys):
    assert main(["precession", *MERCURY]) == 0
    out = pairs(capsys.readouterr().out)
    assert float(out["shift_per_rev_rad"]) == pytest.approx(6.69e-7, rel=2e-3)
    assert float(out["shift_arcsec_per_century"]) == pytest.approx(57.3, rel=0.01)
    assert float(out["revolutions_per_century"]) == pytest.approx(415.2, abs=0.05)


def test_precession_command_is_fast():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "relmech.cli", "precession", *MERCURY], capture_output=True,
                          text=True, check=True)
    assert time.perf_counter() - t0 < 1.0
    assert "shift_arcsec_per_century" in proc.stdout


def test_precession_simulated(capsys):
    assert main(["precession", *MERCURY, "--revs", "6", "--steps-per-rev", "500"]) == 0
    out = pairs(capsys.readouterr().out)
    assert abs(float(out["simulated.relative_deviation"])) < 0.05
    assert main(["precession", *MERCURY, "--revs", "6", "--steps-per-rev", "500", "--tolerance", "1e-9"]) == 2


def test_precession_rejects_bad_elements(capsys):
    assert main(["precession", "--GM", "1e20", "--a", "1e10", "--e", "1.2"]) == 1


def test_help_config(capsys):
    assert main(["--help-config"]) == 0
    assert "orbit.GM : float" in capsys.readouterr().out


def test_no_command_is_an_error(capsys):
    assert main([]) == 1


def test_check_command(tmp_path, capsys):
    assert main(["check", shipped_config("mercury")]) == 0
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = orbit\nc = -1\n")
    assert main(["check", str(bad)]) == 1
    assert "RangeError" in capsys.readouterr().err
    assert main(["check", str(tmp_path / "missing.cfg")]) == 1
    empty = tmp_path / "empty.cfg"
    empty.write_text("")
    assert main(["check", str(empty)]) == 1


def test_run_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("RELMECH_OUT", raising=False)
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("scenario = residual_sweep\nnatural_units = true\nsweep.n = 2\nsweep.flow = gyration\n"
                   "sweep.model = plasma\nsweep.center = 0.5 0 0\nsweep.extent = 0.1\nsweep.tolerance = 1e-4\n")
    assert main(["run", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "residual_sweep" / "residuals.csv").exists()
    failing = tmp_path / "fail.cfg"
    failing.write_text(cfg.read_text().replace("1e-4", "0"))
    assert main(["run", str(failing), "--out", str(tmp_path / "out")]) == 2
    broken = tmp_path / "broken.cfg"
    broken.write_text("scenario = fluid_streamline\nnatural_units = true\nfluid.rho = 0\n")
    assert main(["run", str(broken), "--out", str(tmp_path / "out")]) == 1
    assert "ZeroInertia" in capsys.readouterr().err


def test_run_seed_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("RELMECH_OUT", str(tmp_path))
    cfg = tmp_path / "ids.cfg"
    cfg.write_text("scenario = identity_suite\nidentity.samples = 20\nidentity.vectors = 200\nidentity.gauges = 5\n")
    assert main(["run", str(cfg), "--seed", "11"]) == 0
    first = (tmp_path / "identity_suite" / "report.csv").read_bytes()
    assert main(["run", str(cfg), "--seed", "11"]) == 0
    assert (tmp_path / "identity_suite" / "report.csv").read_bytes() == first
    assert main(["run", str(cfg), "--seed", "12"]) == 0
    assert (tmp_path / "identity_suite" / "report.csv").read_bytes() != first
    assert oct(os.stat(tmp_path / "identity_suite" / "report.csv").st_mode & 0o777) != "0o600"

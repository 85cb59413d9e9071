from pathlib import Path

import pytest

from thrustgov.cli import main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def test_tune(capsys):
    assert main(["tune", "--a", "0.067625", "--b", "0.625", "--zeta", "0.7", "--kp", "0"]) == 0
    out = capsys.readouterr().out
    assert "0.446429" in out and "2.94711" in out


def test_analyze_writes_csv(tmp_path, capsys):
    assert main(["--out-dir", str(tmp_path), "analyze", "--a", "0.067625", "--b", "0.625", "--ki", "2.947"]) == 0
    assert "65.16 deg" in capsys.readouterr().out
    lines = (tmp_path / "loop_analysis.csv").read_text().splitlines()
    assert lines[0].startswith("f [Hz]") and len(lines) == 401


def test_analyze_unstable_exit_code(capsys):
    assert main(["analyze", "--a", "1", "--b", "1", "--ki", "-1"]) == 1
    assert "error" in capsys.readouterr().err


def test_simulate_and_sysid(tmp_path, capsys):
    scen = tmp_path / "s.yaml"
    scen.write_text("schema_version: 1\nname: quick\nduration: 120\nsettle_time: 100\nlog_interval: 0.1\n")
    assert main(["--out-dir", str(tmp_path), "--seed", "3", "simulate", str(scen)]) == 0
    assert (tmp_path / "quick.csv").exists()

    import numpy as np

    from thrustgov.governor import PlantModel
    from thrustgov.sysid import step_response

    t = np.arange(0, 40, 0.05)
    y = step_response(PlantModel(0.068, 0.625), 5e5, 1e6, t, 5.0)
    p = np.where(t >= 5.0, 4e6, 3e6)
    csv_path = tmp_path / "step.csv"
    csv_path.write_text("t,p_dem,thrust\n" + "".join(f"{a!r},{b!r},{c!r}\n" for a, b, c in zip(t.tolist(), p.tolist(), y.tolist())))
    assert main(["--out-dir", str(tmp_path), "sysid", str(csv_path)]) == 0
    assert "B = 0.625" in capsys.readouterr().out
    assert (tmp_path / "step_residuals.csv").exists()


def test_missing_scenario_exit_code(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "nope.yaml")]) == 1


def test_bad_scenario_exit_code(tmp_path, capsys):
    scen = tmp_path / "bad.yaml"
    scen.write_text("schema_version: 1\nwind: {speed: 3}\n")
    assert main(["simulate", str(scen)]) == 1
    assert "[wind]" in capsys.readouterr().err


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.yaml")))
def test_shipped_scenarios_parse(name):
    from thrustgov.harness.scenario import load_scenario

    load_scenario(SCENARIOS / name)


def test_sweep_inf(tmp_path, capsys):
    scen = tmp_path / "s.yaml"
    scen.write_text("schema_version: 1\nname: sw\nduration: 120\nsettle_time: 100\nlog_interval: 0.1\n")
    assert main(["--out-dir", str(tmp_path), "sweep", str(scen), "--thrust-refs", "inf"]) == 0
    assert (tmp_path / "sw_sweep.csv").exists()

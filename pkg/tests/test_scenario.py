import math

import numpy as np
import pytest

from thrustgov.harness.scenario import (
    PowerReference,
    Scenario,
    ScenarioError,
    load_profile,
    load_scenario,
    scenario_from_dict,
)

MINIMAL = {"schema_version": 1}


def test_defaults_from_minimal_document():
    sc = scenario_from_dict(dict(MINIMAL))
    assert sc == Scenario()


def test_full_document(tmp_path):
    text = """
schema_version: 1
name: demo
duration: 300
dt: 0.02
log_interval: 0.1
settle_time: 50
seed: 9
turbine:
  pitch_range_deg: [0, 30]
  pitch_rate_limit_deg: 5
surface:
  source: parametric
  coeffs: {ct_opt: 0.8}
wind: {kind: turbulent, mean_speed: 10, turbulence_intensity: 0.05}
power_reference: {kind: schedule, points: [[0, 4e6], [100, 3.5e6]]}
governor: {enabled: true, thrust_bound: 6.0e5, ki: 1.2}
estimator: {gamma: 40, noise: {omega_r: 0.001, theta_deg: 0.1}}
regulator: {theta_k_deg: 15, demand_time_constant: 5}
output: {dir: results, svg: true}
"""
    path = tmp_path / "s.yaml"
    path.write_text(text)
    sc = load_scenario(path)
    assert sc.name == "demo" and sc.log_every == 5 and sc.n_steps == 15000
    assert sc.turbine.pitch_max == pytest.approx(math.radians(30))
    assert sc.turbine.pitch_rate_limit == pytest.approx(math.radians(5))
    assert sc.surface_coeffs.ct_opt == 0.8
    assert sc.wind.seed == 9 and sc.wind.mean_speed == 10
    assert sc.power_reference.points == ((0.0, 4e6), (100.0, 3.5e6))
    assert sc.governor.enabled and sc.governor.thrust_bound == 6e5 and sc.governor.ki == 1.2
    assert sc.estimator.noise.theta == pytest.approx(math.radians(0.1))
    assert sc.regulator.theta_k == pytest.approx(math.radians(15))
    assert sc.out_dir == "results" and sc.svg


@pytest.mark.parametrize("doc, match", [
    ({}, "schema_version"),
    ({"schema_version": 2}, "schema_version"),
    ({**MINIMAL, "bogus": 1}, "bogus"),
    ({**MINIMAL, "wind": {"speed": 9}}, r"\[wind\]"),
    ({**MINIMAL, "governor": {"kd": 1}}, r"\[governor\]"),
    ({**MINIMAL, "surface": {"source": "file"}}, "path"),
    ({**MINIMAL, "dt": 0.01, "log_interval": 0.015}, "multiple"),
    ({**MINIMAL, "duration": 50, "settle_time": 100}, "settle_time"),
    ({**MINIMAL, "power_reference": {"value": -1}}, "positive"),
])
def test_invalid_documents(doc, match):
    with pytest.raises(ScenarioError, match=match):
        scenario_from_dict(doc)


def test_relative_paths_resolve_against_file(tmp_path):
    (tmp_path / "sub").mkdir()
    path = tmp_path / "sub" / "s.yaml"
    path.write_text("schema_version: 1\nwind: {trace_file: w.txt}\nsurface: {source: file, path: rotor}\n")
    sc = load_scenario(path)
    assert sc.wind_trace_file == str(tmp_path / "sub" / "w.txt")
    assert sc.surface_file == str(tmp_path / "sub" / "rotor")


def test_shipped_profile():
    t, x = load_profile()
    assert t[0] == 0 and t[-1] == 2400
    assert np.all(np.diff(t) > 0)
    assert x.min() >= 0 and x.max() <= 1


def test_profile_scaling():
    pr = PowerReference("profile", p_low=3e6, p_high=4.5e6)
    p = pr.sample(np.linspace(0, 2400, 1000))
    assert p.min() >= 3e6 and p.max() <= 4.5e6


def test_schedule_interpolates():
    pr = PowerReference("schedule", points=((0, 4e6), (10, 3e6)))
    np.testing.assert_allclose(pr.sample(np.array([0, 5, 10, 20])), [4e6, 3.5e6, 3e6, 3e6])


def test_with_seed_updates_wind():
    sc = Scenario().with_seed(17)
    assert sc.seed == 17 and sc.wind.seed == 17

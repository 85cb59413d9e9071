import math

import numpy as np
import pytest

from thrustgov.aero import AeroSurface
from thrustgov.turbine import (
    MeasurementNoise,
    SimulationError,
    TurbineParams,
    TurbineState,
    aero_thrust_true,
    aero_torque,
    generated_power,
    measure,
    step,
)


def flat_surface(cp_val, ct_val):
    return AeroSurface([1.0, 20.0], [0.0, 1.6], [[cp_val] * 2] * 2, [[ct_val] * 2] * 2)


def test_zero_cp_gives_zero_torque(params):
    assert aero_torque(params, flat_surface(0.0, 0.5), 9.0, 0.8, 0.0) == 0.0


def test_torque_scaling_at_fixed_lambda(params, surface):
    t1 = aero_torque(params, surface, 8.0, 0.7, 0.02)
    t2 = aero_torque(params, surface, 16.0, 1.4, 0.02)
    assert t2 == pytest.approx(4.0 * t1, rel=1e-12)


def test_torque_at_optimum_by_hand(params, surface):
    best = surface.max_cp()
    v = 9.0
    w = best.lam * v / 89.15
    expected = 0.5 * 1.225 * math.pi * 89.15**2 * v**3 * best.cp / w
    assert aero_torque(params, surface, v, w, 0.0) == pytest.approx(expected, rel=1e-12)


def test_zero_ct_gives_zero_thrust(params):
    assert aero_thrust_true(params, flat_surface(0.3, 0.0), 9.0, 0.8, 0.0) == 0.0


def test_thrust_hand_value(params):
    # 0.5 * 1.225 * pi * 89.15^2 * 81 * 0.6
    f = aero_thrust_true(params, flat_surface(0.3, 0.6), 9.0, 0.8, 0.0)
    assert f == pytest.approx(743250.02, rel=1e-6)
    assert f == pytest.approx(7.43e5, rel=1e-3)


def test_thrust_quadruples_with_double_wind(params, surface):
    f1 = aero_thrust_true(params, surface, 7.0, 0.6, 0.03)
    f2 = aero_thrust_true(params, surface, 14.0, 1.2, 0.03)
    assert f2 == pytest.approx(4.0 * f1, rel=1e-12)


@pytest.mark.parametrize("tau, w_g, expected", [
    (0.0, 50.27, 0.0),
    (99470.0, 50.27, 5000356.9),
    (49735.0, 50.27, 2500178.45),
])
def test_generated_power(params, tau, w_g, expected):
    st = TurbineState(w_g / params.gear_ratio, 0.0, tau)
    assert generated_power(params, st) == pytest.approx(expected, rel=1e-9)


def test_equilibrium_is_stationary(params, surface):
    v, w, th = 9.0, 0.72, math.radians(2.0)
    tau = aero_torque(params, surface, v, w, th) / params.gear_ratio
    st = TurbineState(w, th, tau)
    nxt = step(params, surface, st, (th, tau), v, 0.01)
    assert nxt.omega_r == pytest.approx(w, rel=1e-13)
    assert nxt.theta == th
    assert nxt.tau_g == tau
    assert nxt.t == pytest.approx(0.01)


def test_torque_rate_limit(params, surface):
    st = TurbineState(0.7, 0.0, 50000.0)
    nxt = step(params, surface, st, (0.0, 150000.0), 9.0, 0.01)
    assert nxt.tau_g - st.tau_g == pytest.approx(150.0, abs=1e-9)


def test_pitch_rate_and_range(params, surface):
    st = TurbineState(0.7, 0.0, 50000.0)
    nxt = step(params, surface, st, (1.0, 50000.0), 9.0, 0.1)
    assert nxt.theta == pytest.approx(math.radians(1.0))
    nxt = step(params, surface, st, (-0.5, 50000.0), 9.0, 0.1)
    assert nxt.theta == 0.0


def test_free_deceleration(params):
    s = flat_surface(0.0, 0.0)
    st = TurbineState(0.7, 0.0, 1.0e5)
    speeds = [st.omega_r]
    for _ in range(50):
        st = step(params, s, st, (0.0, 1.0e5), 9.0, 0.01)
        speeds.append(st.omega_r)
    assert np.all(np.diff(speeds) < 0)


def test_rk4_matches_fine_reference(params, surface):
    # constant actuators, so the rotor ODE is scalar: compare to a much finer step
    st0 = TurbineState(0.6, 0.01, 8.0e4)
    coarse = st0
    for _ in range(100):
        coarse = step(params, surface, coarse, (0.01, 8.0e4), 9.0, 0.1)
    fine = st0
    for _ in range(10000):
        fine = step(params, surface, fine, (0.01, 8.0e4), 9.0, 0.001)
    assert coarse.omega_r == pytest.approx(fine.omega_r, rel=1e-6)


def test_floor_hit_counted(params):
    st = TurbineState(0.002, 0.0, 1.0e6)
    nxt = step(params, flat_surface(0.0, 0.0), st, (0.0, 1.0e6), 9.0, 0.01)
    assert nxt.omega_r == pytest.approx(1e-3)
    assert nxt.floor_hits == 1


def test_non_finite_rejected(params, surface):
    with pytest.raises(SimulationError):
        step(params, surface, TurbineState(0.7, 0.0, 1e5), (math.nan, 1e5), 9.0, 0.01)


@pytest.mark.parametrize("field", ["rho", "radius", "inertia", "gear_ratio", "rated_power"])
def test_params_positive(field):
    with pytest.raises(ValueError):
        TurbineParams(**{field: 0.0})


def test_measure_noise_free_is_exact():
    st = TurbineState(0.7, 0.03, 1e5)
    assert measure(st, MeasurementNoise(), None) == (0.7, 1e5, 0.03)


def test_measure_noise_statistics():
    st = TurbineState(0.7, 0.03, 1e5)
    rng = np.random.default_rng(0)
    samples = np.array([measure(st, MeasurementNoise(0.01, 100.0, 0.001), rng) for _ in range(4000)])
    np.testing.assert_allclose(samples.mean(axis=0), [0.7, 1e5, 0.03], rtol=1e-3, atol=1e-3 * 0.01)
    np.testing.assert_allclose(samples.std(axis=0), [0.01, 100.0, 0.001], rtol=0.05)

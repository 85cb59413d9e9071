"""Immersion-and-Invariance wind speed estimator and the rotor thrust estimate.

The estimator keeps v_hat = xi + gamma*omega_r with
dxi/dt = -(gamma/J) * (tau_a(v_hat, omega_r, theta) - N*tau_g), so that
dv_hat/dt = (gamma/J) * (tau_a(v) - tau_a(v_hat)) along plant trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .aero import AeroSurface
from .turbine import SimulationError, TurbineParams, aero_thrust_true, aero_torque

V_HAT_FLOOR = 0.5
DEFAULT_GAMMA = 60.0
FALLBACK_WIND = 8.0


@dataclass(frozen=True)
class EstimatorState:
    xi: float
    v_hat: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("estimator gain gamma must be positive")


def init_estimator(v_hat: float, omega_r: float, gamma: float = DEFAULT_GAMMA) -> EstimatorState:
    """Estimator state that reports ``v_hat`` at rotor speed ``omega_r``."""
    return EstimatorState(v_hat - gamma * omega_r, v_hat, gamma)


def ii_update(
    est: EstimatorState,
    params: TurbineParams,
    surface: AeroSurface,
    omega_r_meas: float,
    tau_g_meas: float,
    theta_meas: float,
    dt: float,
) -> EstimatorState:
    """One explicit-Euler step of the manifold state followed by the output map."""
    if not (math.isfinite(omega_r_meas) and math.isfinite(tau_g_meas) and math.isfinite(theta_meas)):
        raise SimulationError("non-finite measurement fed to the wind speed estimator")
    v_hat = est.xi + est.gamma * omega_r_meas
    v_hat = max(v_hat, V_HAT_FLOOR)
    imbalance = aero_torque(params, surface, v_hat, omega_r_meas, theta_meas) - params.gear_ratio * tau_g_meas
    xi = est.xi - dt * est.gamma / params.inertia * imbalance
    v_new = max(xi + est.gamma * omega_r_meas, V_HAT_FLOOR)
    if not math.isfinite(v_new):
        raise SimulationError("wind speed estimate diverged")
    return EstimatorState(xi, v_new, est.gamma)


def thrust_estimate(
    params: TurbineParams, surface: AeroSurface, v_hat: float, omega_r_meas: float, theta_meas: float
) -> float:
    return aero_thrust_true(params, surface, v_hat, omega_r_meas, theta_meas)


def steady_wind_speed(
    params: TurbineParams,
    surface: AeroSurface,
    omega_r: float,
    theta: float,
    tau_g: float,
    bracket: tuple[float, float] = (1.0, 30.0),
) -> float:
    """Wind speed balancing aerodynamic and generator torque, or the fallback guess.

    Takes the lowest rising root of tau_a(v) - N*tau_g in ``bracket``; the estimator
    contracts only where aerodynamic torque increases with wind speed.
    """
    load = params.gear_ratio * tau_g

    def f(v):
        return aero_torque(params, surface, v, omega_r, theta) - load

    grid = np.linspace(bracket[0], bracket[1], 300)
    vals = [f(v) for v in grid]
    for k in range(len(grid) - 1):
        if vals[k] < 0.0 <= vals[k + 1]:
            return brentq(f, grid[k], grid[k + 1], xtol=1e-12)
    return FALLBACK_WIND

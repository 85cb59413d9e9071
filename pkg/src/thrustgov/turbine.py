"""Reduced-order turbine: rigid drivetrain driven by the tabulated aerodynamics.

The rotor obeys J*d(omega_r)/dt = tau_a - N*tau_g, with tau_g on the generator
side. Pitch and torque actuators are rate- and range-limited outside the RK4
stages, so commands are held constant over a step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aero import AeroSurface

OMEGA_R_FLOOR = 1e-3


class SimulationError(RuntimeError):
    """Non-finite or otherwise invalid signal inside the simulation."""


@dataclass(frozen=True)
class TurbineParams:
    """Plant constants, SI units, pitch in rad.

    Inertia, gear ratio and actuator rate limits are surrogate values of
    10 MW reference-turbine magnitude, not manufacturer figures.
    """

    rho: float = 1.225
    radius: float = 89.15
    inertia: float = 1.6e8
    gear_ratio: float = 50.0
    eta_eff: float = 1.0
    rated_power: float = 1.0e7
    rated_gen_speed: float = 50.26
    min_gen_speed: float = 15.7
    pitch_min: float = 0.0
    pitch_max: float = math.radians(90.0)
    pitch_rate_limit: float = math.radians(10.0)
    torque_rate_limit: float = 1.5e4

    def __post_init__(self):
        for name in ("rho", "radius", "inertia", "gear_ratio", "eta_eff", "rated_power",
                     "rated_gen_speed", "min_gen_speed", "pitch_rate_limit", "torque_rate_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"TurbineParams.{name} must be strictly positive")
        if not self.min_gen_speed < self.rated_gen_speed:
            raise ValueError("min_gen_speed must be below rated_gen_speed")
        if not 0 <= self.pitch_min < self.pitch_max:
            raise ValueError("pitch range must satisfy 0 <= pitch_min < pitch_max")

    @property
    def rotor_area(self) -> float:
        return math.pi * self.radius**2

    @property
    def rated_torque(self) -> float:
        return self.rated_power / (self.eta_eff * self.rated_gen_speed)


@dataclass(frozen=True)
class TurbineState:
    omega_r: float
    theta: float
    tau_g: float
    t: float = 0.0
    floor_hits: int = 0


def aero_torque(params: TurbineParams, surface: AeroSurface, v: float, omega_r: float, theta: float) -> float:
    lam = params.radius * omega_r / v
    cp = surface.cp(lam, theta)
    return 0.5 * params.rho * params.rotor_area * v**3 * cp / omega_r


def aero_thrust_true(params: TurbineParams, surface: AeroSurface, v: float, omega_r: float, theta: float) -> float:
    lam = params.radius * omega_r / v
    return 0.5 * params.rho * params.rotor_area * v**2 * surface.ct(lam, theta)


def generated_power(params: TurbineParams, state: TurbineState) -> float:
    return params.eta_eff * state.tau_g * params.gear_ratio * state.omega_r


def _rate_limited(current, target, rate, dt, lo, hi):
    target = min(max(target, lo), hi)
    step = rate * dt
    return min(max(target, current - step), current + step)


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise SimulationError(f"non-finite {name}: {v}")


def step(
    params: TurbineParams,
    surface: AeroSurface,
    state: TurbineState,
    commands: tuple[float, float],
    v: float,
    dt: float,
) -> TurbineState:
    """Advance the plant by ``dt`` under (theta_ref, tau_g_ref) and wind ``v``."""
    theta_ref, tau_ref = commands
    _check_finite(theta_ref=theta_ref, tau_g_ref=tau_ref, v=v, dt=dt, omega_r=state.omega_r)
    if not dt > 0:
        raise ValueError("dt must be positive")

    theta = _rate_limited(state.theta, theta_ref, params.pitch_rate_limit, dt,
                          params.pitch_min, params.pitch_max)
    tau_g = _rate_limited(state.tau_g, tau_ref, params.torque_rate_limit, dt, 0.0, math.inf)

    # fixed-step RK4 on the rotor speed with actuators held
    load = params.gear_ratio * tau_g
    inv_j = 1.0 / params.inertia
    k_aero = 0.5 * params.rho * params.rotor_area * v**3
    r_over_v = params.radius / v

    def accel(w):
        w = max(w, OMEGA_R_FLOOR)
        return (k_aero * surface.cp(r_over_v * w, theta) / w - load) * inv_j

    w0 = state.omega_r
    k1 = accel(w0)
    k2 = accel(w0 + 0.5 * dt * k1)
    k3 = accel(w0 + 0.5 * dt * k2)
    k4 = accel(w0 + dt * k3)
    omega_r = w0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(omega_r=omega_r)

    hits = state.floor_hits
    if omega_r < OMEGA_R_FLOOR:
        omega_r = OMEGA_R_FLOOR
        hits += 1
    return TurbineState(omega_r, theta, tau_g, state.t + dt, hits)


@dataclass(frozen=True)
class MeasurementNoise:
    """Zero-mean Gaussian noise standard deviations on the measured channels."""

    omega_r: float = 0.0
    tau_g: float = 0.0
    theta: float = 0.0

    @property
    def enabled(self) -> bool:
        return self.omega_r > 0 or self.tau_g > 0 or self.theta > 0


def measure(state: TurbineState, noise: MeasurementNoise, rng: np.random.Generator | None):
    """Measured (omega_r, tau_g, theta). Noise-free when all stds are zero."""
    if not noise.enabled:
        return state.omega_r, state.tau_g, state.theta
    e = rng.standard_normal(3)
    return (
        max(state.omega_r + noise.omega_r * e[0], OMEGA_R_FLOOR),
        state.tau_g + noise.tau_g * e[1],
        state.theta + noise.theta * e[2],
    )

"""APC-pitch power down-regulator with a conventional fallback controller.

In down-regulation mode the pitch PI drives the generator speed to the
reference obtained by inverting the optimal torque law at the demanded power,
and the torque is the demanded power over the measured generator speed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

from .aero import AeroSurface
from .turbine import TurbineParams

log = logging.getLogger(__name__)

CONVENTIONAL = "conventional"
DOWNREG = "downreg"
OMEGA_G_FLOOR = 1.0
TORQUE_MAX_FACTOR = 1.5


@dataclass(frozen=True)
class RegulatorConfig:
    """Gains in rad per (rad/s) of generator-speed error; angles in rad.

    ``k_opt`` of None means derive it from the loaded surface.
    """

    kp0: float = 0.106
    ki0: float = 0.0214
    theta_k: float = math.radians(20.0)
    k_opt: float | None = None
    theta_switch: float = math.radians(1.0)
    theta_fine: float = 0.0
    demand_time_constant: float = 10.0

    def __post_init__(self):
        if not (self.kp0 > 0 and self.ki0 > 0 and self.theta_k > 0):
            raise ValueError("kp0, ki0 and theta_k must be positive")
        if self.k_opt is not None and not self.k_opt > 0:
            raise ValueError("k_opt must be positive")
        if not self.theta_switch > self.theta_fine:
            raise ValueError("theta_switch must exceed theta_fine")
        if self.demand_time_constant < 0:
            raise ValueError("demand_time_constant must be non-negative")


@dataclass
class RegulatorState:
    pitch_integrator: float = 0.0
    mode: str = CONVENTIONAL
    omega_g_ref: float = 0.0
    p_dem_filtered: float | None = None
    transitions: list = field(default_factory=list)


def optimal_torque_gain(params: TurbineParams, surface: AeroSurface) -> float:
    """Generator-side k_opt = 0.5*rho*pi*R^5*Cp*/(lambda*^3 N^3) from the surface optimum."""
    best = surface.max_cp()
    return (
        0.5 * params.rho * math.pi * params.radius**5 * best.cp
        / (best.lam**3 * params.gear_ratio**3)
    )


def resolve_config(config: RegulatorConfig, params: TurbineParams, surface: AeroSurface) -> RegulatorConfig:
    if config.k_opt is not None:
        return config
    return replace(config, k_opt=optimal_torque_gain(params, surface))


def gen_speed_ref(config: RegulatorConfig, params: TurbineParams, p_dem: float) -> float:
    """Generator speed at which the optimal torque law would produce ``p_dem``."""
    if p_dem <= 0:
        return params.min_gen_speed
    w = (p_dem / (params.eta_eff * config.k_opt)) ** (1.0 / 3.0)
    return min(max(w, params.min_gen_speed), params.rated_gen_speed)


def scheduled_gains(config: RegulatorConfig, theta_meas: float) -> tuple[float, float]:
    scale = 1.0 / (1.0 + max(theta_meas, 0.0) / config.theta_k)
    return config.kp0 * scale, config.ki0 * scale


def pitch_command(
    config: RegulatorConfig,
    state: RegulatorState,
    params: TurbineParams,
    omega_g_meas: float,
    omega_g_ref: float,
    theta_meas: float,
    dt: float,
) -> float:
    """Gain-scheduled PI on generator-speed error with conditional integration.

    Mutates ``state.pitch_integrator``.
    """
    lo, hi = max(config.theta_fine, params.pitch_min), params.pitch_max
    kp, ki = scheduled_gains(config, theta_meas)
    err = omega_g_meas - omega_g_ref
    trial = state.pitch_integrator + ki * err * dt
    unsat = kp * err + trial
    if not ((unsat > hi and err > 0) or (unsat < lo and err < 0)):
        state.pitch_integrator = min(max(trial, lo), hi)
    return min(max(kp * err + state.pitch_integrator, lo), hi)


def torque_command(config: RegulatorConfig, params: TurbineParams, p_dem: float, omega_g_meas: float) -> float:
    tau_max = TORQUE_MAX_FACTOR * params.rated_torque
    if omega_g_meas <= OMEGA_G_FLOOR:
        log.warning("generator speed %.3g rad/s below floor; torque held at maximum", omega_g_meas)
        return tau_max
    tau = p_dem / (params.eta_eff * omega_g_meas)
    return min(max(tau, 0.0), tau_max)


def mode_select(
    config: RegulatorConfig,
    p_dem: float,
    rated_power: float,
    omega_g_meas: float,
    omega_g_ref: float,
    theta_meas: float,
) -> str:
    if p_dem < rated_power and (omega_g_meas > omega_g_ref or theta_meas > config.theta_switch):
        return DOWNREG
    return CONVENTIONAL


def conventional_step(
    config: RegulatorConfig,
    params: TurbineParams,
    state: RegulatorState,
    omega_g_meas: float,
    theta_meas: float,
    dt: float,
) -> tuple[float, float]:
    """Region-2 optimal torque law, torque capped at rated power, pitch PI on rated speed."""
    tau = config.k_opt * omega_g_meas**2
    if omega_g_meas > OMEGA_G_FLOOR:
        tau = min(tau, params.rated_power / (params.eta_eff * omega_g_meas))
    theta = pitch_command(config, state, params, omega_g_meas, params.rated_gen_speed, theta_meas, dt)
    return theta, tau


def regulate(
    config: RegulatorConfig,
    params: TurbineParams,
    state: RegulatorState,
    p_dem: float,
    omega_g_meas: float,
    theta_meas: float,
    dt: float,
    t: float = 0.0,
) -> tuple[float, float]:
    """Select the mode and return (theta_ref, tau_g_ref). Mutates ``state``.

    The demanded power passes through a first-order set-point filter of time
    constant ``config.demand_time_constant`` (none when zero) before it reaches
    the speed reference and the torque law.
    """
    if config.demand_time_constant > 0 and state.p_dem_filtered is not None:
        alpha = dt / (config.demand_time_constant + dt)
        p_dem = state.p_dem_filtered + alpha * (p_dem - state.p_dem_filtered)
    state.p_dem_filtered = p_dem
    w_ref = gen_speed_ref(config, params, p_dem)
    mode = mode_select(config, p_dem, params.rated_power, omega_g_meas, w_ref, theta_meas)
    if mode != state.mode:
        state.transitions.append((t, mode))
        state.mode = mode
    state.omega_g_ref = w_ref
    if mode == DOWNREG:
        theta = pitch_command(config, state, params, omega_g_meas, w_ref, theta_meas, dt)
        return theta, torque_command(config, params, p_dem, omega_g_meas)
    return conventional_step(config, params, state, omega_g_meas, theta_meas, dt)


def downreg_operating_point(
    config: RegulatorConfig, params: TurbineParams, surface: AeroSurface, v: float, p_dem: float
) -> tuple[float, float]:
    """Steady (omega_r, theta) of the down-regulator at constant wind ``v``."""
    from scipy.optimize import brentq

    omega_r = gen_speed_ref(config, params, p_dem) / params.gear_ratio
    lam = params.radius * omega_r / v
    cp_req = p_dem / (params.eta_eff * 0.5 * params.rho * params.rotor_area * v**3)
    if surface.cp(lam, params.pitch_min) < cp_req:
        raise ValueError(f"p_dem={p_dem:g} W not available at v={v:g} m/s")
    theta = brentq(lambda th: surface.cp(lam, th) - cp_req, params.pitch_min, float(surface.theta_grid[-1]))
    return omega_r, theta


def design_pitch_gains(
    config: RegulatorConfig,
    params: TurbineParams,
    surface: AeroSurface,
    v: float = 9.0,
    p_dem: float = 4.0e6,
    freq_hz: float = 0.05,
    zeta: float = 0.7,
) -> tuple[float, float]:
    """Unscheduled (kp0, ki0) placing the linearised speed loop at (freq_hz, zeta).

    Linearises J*dw_r/dt = tau_a(w_r, theta) - P/w_r about the down-regulated
    operating point and matches s^2 - (a + N*b*kp)/J s - N*b*ki/J to the target.
    """
    from .turbine import aero_torque

    config = resolve_config(config, params, surface)
    w, th = downreg_operating_point(config, params, surface, v, p_dem)
    h = 1e-5
    b = (aero_torque(params, surface, v, w, th + h) - aero_torque(params, surface, v, w, th - h)) / (2 * h)
    a = (aero_torque(params, surface, v, w + h, th) - aero_torque(params, surface, v, w - h, th)) / (2 * h)
    a += p_dem / (params.eta_eff * w**2)
    wn = 2 * math.pi * freq_hz
    n, j = params.gear_ratio, params.inertia
    kp = -(2 * zeta * wn * j + a) / (n * b)
    ki = -(wn**2) * j / (n * b)
    scale = 1.0 + th / config.theta_k
    return kp * scale, ki * scale

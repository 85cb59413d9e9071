"""Closed-loop simulation: governor -> down-regulator -> turbine -> estimators -> governor."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import estimation, regulation, turbine
from ..aero import AeroSurface
from ..governor import GovernorState, governor_update
from ..turbine import SimulationError, TurbineParams, TurbineState
from .scenario import Scenario

log = logging.getLogger(__name__)

# (attribute, CSV header) in fixed order; pitch is written in degrees
COLUMNS = (
    ("t", "t [s]"),
    ("v_true", "v_true [m/s]"),
    ("v_hat", "v_hat [m/s]"),
    ("omega_r", "omega_r [rad/s]"),
    ("theta", "theta [deg]"),
    ("tau_g", "tau_g [N m]"),
    ("p_ref", "P_ref [W]"),
    ("u", "u [W]"),
    ("p_dem", "P_dem [W]"),
    ("p_gen", "P_gen [W]"),
    ("f_true", "F_true [N]"),
    ("f_hat", "F_hat [N]"),
    ("mode", "mode [-]"),
    ("gov_active", "gov_active [-]"),
)
MODE_CODES = {regulation.CONVENTIONAL: 0, regulation.DOWNREG: 1}


@dataclass
class SimLog:
    t: np.ndarray
    v_true: np.ndarray
    v_hat: np.ndarray
    omega_r: np.ndarray
    theta: np.ndarray
    tau_g: np.ndarray
    p_ref: np.ndarray
    u: np.ndarray
    p_dem: np.ndarray
    p_gen: np.ndarray
    f_true: np.ndarray
    f_hat: np.ndarray
    mode: np.ndarray  # 0 conventional, 1 down-regulation
    gov_active: np.ndarray
    seed: int = 0
    thrust_bound: float = math.nan
    mode_transitions: list = field(default_factory=list)
    floor_hits: int = 0
    wind_floor_hits: int = 0

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def signals(self) -> dict:
        return {name: getattr(self, name) for name, _ in COLUMNS}

    def settled(self, settle_time: float) -> np.ndarray:
        return self.t >= settle_time - 1e-9

    def identical_to(self, other: "SimLog") -> bool:
        """Bit-exact comparison of every logged signal."""
        return all(
            a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(self.signals().values(), other.signals().values())
        )

    def active_transitions(self, mask: np.ndarray | None = None) -> int:
        a = self.gov_active if mask is None else self.gov_active[mask]
        return int(np.count_nonzero(a[1:] != a[:-1]))

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = [getattr(self, name) for name, _ in COLUMNS]
        cols[4] = np.degrees(self.theta)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([h for _, h in COLUMNS])
            for row in zip(*cols):
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else int(x) for x in row])
        return path

    @classmethod
    def from_csv(cls, path) -> "SimLog":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != [h for _, h in COLUMNS]:
                raise ValueError(f"{path}: unexpected header {header}")
            data = np.array([[float(x) for x in row] for row in reader])
        kw = {name: data[:, i] for i, (name, _) in enumerate(COLUMNS)}
        kw["theta"] = np.radians(kw["theta"])
        kw["mode"] = kw["mode"].astype(np.int8)
        kw["gov_active"] = kw["gov_active"].astype(bool)
        return cls(**kw)


def initial_state(scenario: Scenario, params: TurbineParams, surface: AeroSurface,
                  reg_cfg: regulation.RegulatorConfig, v0: float):
    """Steady operating point for the first wind sample and power reference.

    Starts on the down-regulated equilibrium when the reference is below the
    available power, otherwise on the optimal-torque curve.
    """
    p0 = scenario.power_reference.initial()
    reg_state = regulation.RegulatorState()
    try:
        omega_r, theta = regulation.downreg_operating_point(reg_cfg, params, surface, v0, p0)
        if p0 >= params.rated_power:
            raise ValueError
        tau_g = p0 / (params.eta_eff * params.gear_ratio * omega_r)
        reg_state.mode = regulation.DOWNREG
        reg_state.pitch_integrator = theta
        reg_state.omega_g_ref = omega_r * params.gear_ratio
    except ValueError:
        best = surface.max_cp()
        w_g = min(max(best.lam * v0 / params.radius * params.gear_ratio, params.min_gen_speed),
                  params.rated_gen_speed)
        omega_r, theta = w_g / params.gear_ratio, params.pitch_min
        tau_g = min(reg_cfg.k_opt * w_g**2, params.rated_power / (params.eta_eff * w_g))
    return TurbineState(omega_r, theta, tau_g, 0.0), reg_state


def _check(k, **values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise SimulationError(f"step {k}: non-finite {name} ({v})")


def run(scenario: Scenario, thrust_bound: float | None = None) -> SimLog:
    """Simulate ``scenario``; ``thrust_bound`` overrides the configured governor bound."""
    params = scenario.turbine
    surface = scenario.build_surface()
    reg_cfg = regulation.resolve_config(scenario.regulator, params, surface)
    wind = scenario.build_wind()
    n, dt = scenario.n_steps, scenario.dt
    v = wind.samples
    times = np.arange(n) * dt
    p_ref_series = scenario.power_reference.sample(times)

    gov_settings = scenario.governor
    gov_cfg = None
    bound = math.nan
    if gov_settings.enabled:
        bound = thrust_bound if thrust_bound is not None else resolve_thrust_bound(scenario, params, surface, reg_cfg)
        gov_cfg = gov_settings.config(bound)
    gov_state = GovernorState()

    state, reg_state = initial_state(scenario, params, surface, reg_cfg, float(v[0]))
    est_cfg = scenario.estimator
    noise = est_cfg.noise
    rng = np.random.default_rng(scenario.seed + 1) if noise.enabled else None
    v_hat0 = est_cfg.v_hat0
    if v_hat0 is None:
        v_hat0 = estimation.steady_wind_speed(params, surface, state.omega_r, state.theta, state.tau_g)
    est = estimation.init_estimator(v_hat0, state.omega_r, est_cfg.gamma)

    every = scenario.log_every
    m = (n + every - 1) // every
    out = {name: np.empty(m) for name in ("t", "v_true", "v_hat", "omega_r", "theta", "tau_g", "p_ref",
                                          "u", "p_dem", "p_gen", "f_true", "f_hat")}
    mode_log = np.empty(m, dtype=np.int8)
    active_log = np.zeros(m, dtype=bool)

    N = params.gear_ratio
    for k in range(n):
        t = k * dt
        vk = float(v[k])
        w_meas, tau_meas, th_meas = turbine.measure(state, noise, rng)
        est = estimation.ii_update(est, params, surface, w_meas, tau_meas, th_meas, dt)
        f_hat = estimation.thrust_estimate(params, surface, est.v_hat, w_meas, th_meas)
        p_ref = float(p_ref_series[k])
        if gov_cfg is not None:
            p_dem, gov_state = governor_update(gov_cfg, gov_state, f_hat, p_ref, dt)
        else:
            p_dem = p_ref
        commands = regulation.regulate(reg_cfg, params, reg_state, p_dem, N * w_meas, th_meas, dt, t)

        if k % every == 0:
            i = k // every
            f_true = turbine.aero_thrust_true(params, surface, vk, state.omega_r, state.theta)
            p_gen = turbine.generated_power(params, state)
            _check(k, f_hat=f_hat, f_true=f_true, p_dem=p_dem, v_hat=est.v_hat)
            out["t"][i] = t
            out["v_true"][i] = vk
            out["v_hat"][i] = est.v_hat
            out["omega_r"][i] = state.omega_r
            out["theta"][i] = state.theta
            out["tau_g"][i] = state.tau_g
            out["p_ref"][i] = p_ref
            out["u"][i] = gov_state.u
            out["p_dem"][i] = p_dem
            out["p_gen"][i] = p_gen
            out["f_true"][i] = f_true
            out["f_hat"][i] = f_hat
            mode_log[i] = MODE_CODES[reg_state.mode]
            active_log[i] = gov_state.active

        state = turbine.step(params, surface, state, commands, vk, dt)

    if state.floor_hits or wind.floor_hits:
        log.warning("floor hits: rotor %d, wind %d", state.floor_hits, wind.floor_hits)
    return SimLog(
        **out, mode=mode_log, gov_active=active_log, seed=scenario.seed, thrust_bound=bound,
        mode_transitions=list(reg_state.transitions), floor_hits=state.floor_hits,
        wind_floor_hits=wind.floor_hits,
    )


def steady_thrust(scenario: Scenario, params=None, surface=None, reg_cfg=None) -> float:
    """Unconstrained steady thrust at the mean wind speed and initial power reference."""
    params = params or scenario.turbine
    surface = surface or scenario.build_surface()
    reg_cfg = regulation.resolve_config(reg_cfg or scenario.regulator, params, surface)
    v = scenario.wind.mean_speed
    state, _ = initial_state(scenario, params, surface, reg_cfg, v)
    return turbine.aero_thrust_true(params, surface, v, state.omega_r, state.theta)


def resolve_thrust_bound(scenario, params, surface, reg_cfg) -> float:
    g = scenario.governor
    if g.thrust_bound is not None:
        return float(g.thrust_bound)
    if g.thrust_bound_fraction is not None:
        return g.thrust_bound_fraction * steady_thrust(scenario, params, surface, reg_cfg)
    raise SimulationError("governor enabled without thrust_bound or thrust_bound_fraction")

"""Scenario description and its YAML schema (``schema_version: 1``)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..aero import AeroSurface, ParametricCoeffs, load_surface, parametric_surface
from ..estimation import DEFAULT_GAMMA
from ..governor import INTEGRAL, GovernorConfig
from ..regulation import RegulatorConfig
from ..turbine import MeasurementNoise, TurbineParams
from ..windfield import WindSpec, WindTrace, generate, load_trace

SCHEMA_VERSION = 1

# Governor gains for the shipped plant: first-order fit of the 3 -> 4 MW step at
# 9 m/s (see ``harness.identify.identify_plant``), tuned with zeta = 0.7, kp = 0.
DEFAULT_GOV_KI = 0.871
DEFAULT_GOV_KP = 0.0


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class PowerReference:
    """Power reference signal: constant, piecewise-linear schedule, or normalised profile.

    A profile is a two-column (t [s], value in [0, 1]) file scaled to [p_low, p_high];
    ``path`` None selects the shipped 40-minute surrogate test profile.
    """

    kind: str = "constant"
    value: float = 4.0e6
    points: tuple = ()
    path: str | None = None
    p_low: float = 3.0e6
    p_high: float = 4.5e6

    def __post_init__(self):
        if self.kind not in ("constant", "schedule", "profile"):
            raise ScenarioError(f"unknown power_reference kind {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise ScenarioError("power reference must be positive")
        if self.kind == "schedule":
            if len(self.points) < 1:
                raise ScenarioError("schedule needs at least one (t, W) point")
            if any(not float(p) > 0 for _, p in self.points):
                raise ScenarioError("schedule powers must be positive")
        if self.kind == "profile" and not 0 < self.p_low <= self.p_high:
            raise ScenarioError("profile band must satisfy 0 < p_low <= p_high")

    def sample(self, times: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full(times.shape, float(self.value))
        if self.kind == "schedule":
            pts = np.array(self.points, dtype=float)
            return np.interp(times, pts[:, 0], pts[:, 1])
        t, x = load_profile(self.path)
        return self.p_low + (self.p_high - self.p_low) * np.interp(times, t, x)

    def initial(self) -> float:
        return float(self.sample(np.zeros(1))[0])


def load_profile(path=None) -> tuple[np.ndarray, np.ndarray]:
    if path is None:
        text = resources.files("thrustgov").joinpath("data/power_profile.csv").read_text()
    else:
        text = Path(path).read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            if not rows:
                continue  # header
            raise ScenarioError(f"{path or 'power_profile.csv'}:{lineno}: malformed row {line!r}") from None
    data = np.array(rows)
    if np.any(data[:, 1] < 0) or np.any(data[:, 1] > 1):
        raise ScenarioError("normalised profile values must lie in [0, 1]")
    return data[:, 0], data[:, 1]


@dataclass(frozen=True)
class GovernorSettings:
    enabled: bool = False
    thrust_bound: float | None = None
    thrust_bound_fraction: float | None = None
    kp: float = DEFAULT_GOV_KP
    ki: float = DEFAULT_GOV_KI
    u_max: float | None = None
    p_min: float = 1.0e6
    thrust_ref_offset: float = 0.0
    switching: str = INTEGRAL

    def config(self, bound: float) -> GovernorConfig:
        return GovernorConfig(
            f_t_ref=bound, ki=self.ki, kp=self.kp, u_max=self.u_max, p_min=self.p_min,
            thrust_ref_offset=self.thrust_ref_offset, switching=self.switching,
        )


@dataclass(frozen=True)
class EstimatorSettings:
    gamma: float = DEFAULT_GAMMA
    v_hat0: float | None = None
    noise: MeasurementNoise = field(default_factory=MeasurementNoise)


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    duration: float = 400.0
    dt: float = 0.01
    log_interval: float = 0.01
    settle_time: float = 100.0
    seed: int = 1
    turbine: TurbineParams = field(default_factory=TurbineParams)
    surface_file: str | None = None
    surface_coeffs: ParametricCoeffs = field(default_factory=ParametricCoeffs)
    wind: WindSpec = field(default_factory=WindSpec)
    wind_trace_file: str | None = None
    power_reference: PowerReference = field(default_factory=PowerReference)
    governor: GovernorSettings = field(default_factory=GovernorSettings)
    estimator: EstimatorSettings = field(default_factory=EstimatorSettings)
    regulator: RegulatorConfig = field(default_factory=RegulatorConfig)
    out_dir: str = "out"
    svg: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and self.duration > 0):
            raise ScenarioError("dt and duration must be positive")
        ratio = self.log_interval / self.dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ScenarioError("log_interval must be a positive integer multiple of dt")
        if not self.duration > self.settle_time:
            raise ScenarioError("duration must exceed settle_time")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))

    @property
    def log_every(self) -> int:
        return int(round(self.log_interval / self.dt))

    def build_surface(self) -> AeroSurface:
        if self.surface_file:
            return load_surface(self.surface_file)
        return parametric_surface(self.surface_coeffs)

    def build_wind(self) -> WindTrace:
        if self.wind_trace_file:
            trace = load_trace(self.wind_trace_file, self.dt)
            if len(trace) < self.n_steps:
                raise ScenarioError(
                    f"wind trace has {len(trace)} samples, scenario needs {self.n_steps}"
                )
            return trace
        return generate(self.wind, self.duration, self.dt)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed, wind=replace(self.wind, seed=seed))


def _build(cls, data, section, converters=None):
    data = dict(data or {})
    converters = converters or {}
    known = {f.name for f in fields(cls)}
    for key in list(data):
        if key in converters:
            name, value = converters[key](data.pop(key))
            data[name] = value
    unknown = set(data) - known
    if unknown:
        raise ScenarioError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"[{section}] {exc}") from None


def _deg(name):
    return lambda v: (name, math.radians(float(v)))


def scenario_from_dict(doc: dict) -> Scenario:
    doc = dict(doc or {})
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"schema_version must be {SCHEMA_VERSION}, got {version!r}")
    seed = int(doc.get("seed", 1))

    turbine = dict(doc.pop("turbine", {}) or {})
    if "pitch_range_deg" in turbine:
        lo, hi = turbine.pop("pitch_range_deg")
        turbine["pitch_min"], turbine["pitch_max"] = math.radians(lo), math.radians(hi)
    params = _build(TurbineParams, turbine, "turbine", {"pitch_rate_limit_deg": _deg("pitch_rate_limit")})

    surf = dict(doc.pop("surface", {}) or {})
    source = surf.pop("source", "parametric")
    surface_file = None
    coeffs = ParametricCoeffs()
    if source == "file":
        if "path" not in surf:
            raise ScenarioError("[surface] source 'file' needs a path")
        surface_file = str(surf.pop("path"))
    elif source == "parametric":
        coeffs = _build(ParametricCoeffs, surf.pop("coeffs", {}), "surface.coeffs")
    else:
        raise ScenarioError(f"[surface] unknown source {source!r}")
    if surf:
        raise ScenarioError(f"[surface] unknown keys: {', '.join(sorted(surf))}")

    wind = dict(doc.pop("wind", {}) or {})
    trace_file = wind.pop("trace_file", None)
    wind.setdefault("seed", seed)
    if "steps" in wind:
        wind["step_schedule"] = tuple(tuple(map(float, p)) for p in wind.pop("steps"))
    wind_spec = _build(WindSpec, wind, "wind")

    pref = dict(doc.pop("power_reference", {}) or {})
    if "points" in pref:
        pref["points"] = tuple(tuple(map(float, p)) for p in pref["points"])
    power = _build(PowerReference, pref, "power_reference")

    governor = _build(GovernorSettings, doc.pop("governor", {}), "governor")

    est = dict(doc.pop("estimator", {}) or {})
    noise = dict(est.pop("noise", {}) or {})
    noise_cfg = _build(MeasurementNoise, noise, "estimator.noise", {"theta_deg": _deg("theta")})
    estimator = _build(EstimatorSettings, {**est, "noise": noise_cfg}, "estimator")

    regulator = _build(RegulatorConfig, doc.pop("regulator", {}), "regulator", {
        "theta_k_deg": _deg("theta_k"),
        "theta_switch_deg": _deg("theta_switch"),
        "theta_fine_deg": _deg("theta_fine"),
    })

    out = dict(doc.pop("output", {}) or {})
    top = {k: doc.pop(k) for k in list(doc) if k in ("name", "duration", "dt", "log_interval", "settle_time", "seed")}
    if doc:
        raise ScenarioError(f"unknown top-level keys: {', '.join(sorted(doc))}")
    try:
        return Scenario(
            **top,
            turbine=params,
            surface_file=surface_file,
            surface_coeffs=coeffs,
            wind=wind_spec,
            wind_trace_file=trace_file,
            power_reference=power,
            governor=governor,
            estimator=estimator,
            regulator=regulator,
            out_dir=str(out.get("dir", "out")),
            svg=bool(out.get("svg", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from None


class _Loader(yaml.SafeLoader):
    pass


# YAML 1.1 reads 4.0e6 (no exponent sign) as a string; accept it as a float
_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*\.[0-9_]*|\.[0-9_]+|[0-9][0-9_]*)(?:[eE][-+]?[0-9]+)?$"
               r"|^[-+]?\.(?:inf|Inf|INF)$|^\.(?:nan|NaN|NAN)$"),
    list("-+0123456789."),
)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = yaml.load(path.read_text(), Loader=_Loader)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: expected a mapping at top level")
    base = path.parent
    scenario = scenario_from_dict(doc)
    # relative file references resolve against the scenario file
    updates = {}
    for attr in ("surface_file", "wind_trace_file"):
        val = getattr(scenario, attr)
        if val and not Path(val).is_absolute():
            updates[attr] = str(base / val)
    pr = scenario.power_reference
    if pr.kind == "profile" and pr.path and not Path(pr.path).is_absolute():
        updates["power_reference"] = replace(pr, path=str(base / pr.path))
    return replace(scenario, **updates) if updates else scenario

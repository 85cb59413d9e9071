"""Rotor-effective wind speed series: constant, stepped, or Ornstein-Uhlenbeck turbulence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class WindSpec:
    kind: str = "constant"  # constant | steps | turbulent
    mean_speed: float = 9.0
    turbulence_intensity: float = 0.0
    correlation_time: float = 10.0
    seed: int = 1
    step_schedule: tuple = field(default_factory=tuple)  # ((t, speed), ...)

    def __post_init__(self):
        if self.kind not in ("constant", "steps", "turbulent"):
            raise ValueError(f"unknown wind kind {self.kind!r}")
        if not self.mean_speed > 0:
            raise ValueError("mean_speed must be positive")
        if not 0 <= self.turbulence_intensity < 0.5:
            raise ValueError("turbulence_intensity must lie in [0, 0.5)")
        if not self.correlation_time > 0:
            raise ValueError("correlation_time must be positive")
        if self.kind == "steps":
            if not self.step_schedule:
                raise ValueError("steps wind needs a step_schedule")
            times = [float(t) for t, _ in self.step_schedule]
            if any(b < a for a, b in zip(times, times[1:])):
                raise ValueError("step_schedule times must be non-decreasing")
            if any(not float(v) > 0 for _, v in self.step_schedule):
                raise ValueError("step speeds must be positive")


@dataclass(frozen=True)
class WindTrace:
    dt: float
    samples: np.ndarray
    floor_hits: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise TraceError("dt must be positive")
        if np.any(~(self.samples > 0)):
            raise TraceError("wind samples must be positive")

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt


def generate(spec: WindSpec, duration: float, dt: float) -> WindTrace:
    if not duration > 0 or not dt > 0:
        raise ValueError("duration and dt must be positive")
    n = int(round(duration / dt))
    if spec.kind == "constant":
        return WindTrace(dt, np.full(n, float(spec.mean_speed)))

    if spec.kind == "steps":
        t = np.arange(n) * dt
        v = np.full(n, float(spec.mean_speed))
        for t0, speed in spec.step_schedule:
            v[t >= float(t0) - 1e-9 * dt] = float(speed)
        return WindTrace(dt, v)

    # exact discretisation of dx = -x/tc dt + sigma*sqrt(2/tc) dW, stationary std sigma
    sigma = spec.turbulence_intensity * spec.mean_speed
    a = math.exp(-dt / spec.correlation_time)
    b = sigma * math.sqrt(1.0 - a * a)
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(n)
    x0 = sigma * noise[0]
    rest, _ = lfilter([b], [1.0, -a], noise[1:], zi=[a * x0])
    x = np.concatenate(([x0], rest))
    # pin realised mean and std to the WindSpec values; finite windows of a slow process drift otherwise
    if n > 1 and x.std() > 0:
        x = (x - x.mean()) * (sigma / x.std())
    v = spec.mean_speed + x
    floor = 0.2 * spec.mean_speed
    hits = int(np.count_nonzero(v < floor))
    return WindTrace(dt, np.maximum(v, floor), floor_hits=hits)


def load_trace(path, dt: float) -> WindTrace:
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise TraceError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not (v > 0 and math.isfinite(v)):
                raise TraceError(f"{path}:{lineno}: wind speed must be positive and finite, got {text}")
            values.append(v)
    if not values:
        raise TraceError(f"{path}: no samples")
    return WindTrace(dt, np.array(values))


def save_trace(trace: WindTrace, path) -> Path:
    path = Path(path)
    path.write_text("".join(f"{float(v)!r}\n" for v in trace.samples))
    return path

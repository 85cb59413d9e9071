"""First-order identification of the demanded-power to thrust response.

Fits F(t) = F0 + dP * (A/B) * (1 - exp(-B (t - t0))) to a logged step. For
each candidate pole B the offset F0 and static gain A/B enter linearly and are
solved in closed form; B itself is located by a log-spaced grid scan refined
with golden-section search.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .governor import PlantModel

# reference identification (3 -> 4 MW at 9 m/s); the loop design uses the finer A
REFERENCE_A_TEXT = 0.068
REFERENCE_A_DESIGN = 0.067625
REFERENCE_B = 0.625


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class StepExperiment:
    dt: float
    p_dem_before: float
    p_dem_after: float
    thrust_series: np.ndarray
    step_time: float

    @property
    def step_size(self) -> float:
        return self.p_dem_after - self.p_dem_before

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.thrust_series)) * self.dt


@dataclass(frozen=True)
class FitResult:
    model: PlantModel
    f0: float
    residual_rms: float
    excursion: float
    residuals: np.ndarray

    @property
    def a_kn_per_mw(self) -> float:
        """A with thrust in kN and power in MW (per second)."""
        return self.model.a * 1e3

    def summary(self) -> str:
        m = self.model
        return (
            f"A = {m.a:.6g} N/(W s)  [{self.a_kn_per_mw:.6g} kN/(MW s)]\n"
            f"B = {m.b:.6g} 1/s\n"
            f"static gain A/B = {m.dc_gain:.6g} N/W\n"
            f"F0 = {self.f0:.6g} N\n"
            f"residual RMS = {self.residual_rms:.4g} N ({100 * self.residual_rms / abs(self.excursion):.3g}% of excursion)"
        )


def step_response(model: PlantModel, f0: float, dp: float, t: np.ndarray, t0: float) -> np.ndarray:
    tau = np.clip(np.asarray(t, dtype=float) - t0, 0.0, None)
    return f0 + dp * model.dc_gain * (1.0 - np.exp(-model.b * tau))


def _solve_linear(phi, y):
    X = np.column_stack([np.ones_like(phi), phi])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ coef
    return coef, float(r @ r)


def fit_first_order(exp: StepExperiment, b_bounds: tuple[float, float] = (1e-3, 50.0)) -> FitResult:
    y = np.asarray(exp.thrust_series, dtype=float)
    if not exp.dt > 0:
        raise FitError("dt must be positive")
    if exp.step_size == 0:
        raise FitError("zero power step: nothing to identify")
    if y.size < 10 or not np.all(np.isfinite(y)):
        raise FitError("thrust series too short or contains non-finite values")
    t = exp.times
    tau = t - exp.step_time
    post = tau >= 0
    if post.sum() < 5:
        raise FitError("fewer than 5 samples after the step")

    n_tail = max(3, int(post.sum()) // 10)
    tail_t, tail = t[post][-n_tail:], y[post][-n_tail:]
    before = y[~post].mean() if (~post).any() else y[post][0]
    excursion = tail.mean() - before
    # drift across the tail window from a straight-line fit; only a drift that is
    # both above 2% and distinguishable from measurement noise counts as unsettled
    coef = np.polyfit(tail_t, tail, 1)
    span = tail_t[-1] - tail_t[0]
    drift = abs(coef[0]) * span
    resid_tail = tail - np.polyval(coef, tail_t)
    sxx = np.sum((tail_t - tail_t.mean()) ** 2)
    drift_se = math.sqrt(resid_tail @ resid_tail / max(n_tail - 2, 1) / sxx) * span
    if excursion == 0 or (drift > 0.02 * abs(excursion) and drift > 3.0 * drift_se):
        raise FitError(
            f"series has not settled: last 10% drifts by {drift:.4g}, "
            f"more than 2% of the excursion {excursion:.4g}"
        )
    tpos = np.clip(tau, 0.0, None)

    def sse(log_b):
        phi = 1.0 - np.exp(-math.exp(log_b) * tpos)
        return _solve_linear(phi, y)[1]

    lo, hi = (math.log(v) for v in b_bounds)
    grid = np.linspace(lo, hi, 121)
    costs = [sse(g) for g in grid]
    k = int(np.argmin(costs))
    if k in (0, len(grid) - 1):
        raise FitError(f"pole estimate at the search boundary ({math.exp(grid[k]):.4g} 1/s)")
    res = minimize_scalar(sse, bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden",
                          options={"xtol": 1e-10})
    b = math.exp(res.x)
    phi = 1.0 - np.exp(-b * tpos)
    (f0, gain_dp), _ = _solve_linear(phi, y)
    static_gain = gain_dp / exp.step_size
    a = static_gain * b
    if not a > 0:
        raise FitError(f"identified gain A={a:.4g} is not positive")
    resid = y - (f0 + gain_dp * phi)
    return FitResult(PlantModel(a, b), float(f0), float(np.sqrt(np.mean(resid**2))), float(excursion), resid)


def load_step_csv(path, step_time: float | None = None) -> StepExperiment:
    """Read a CSV with columns (t, p_dem, thrust); header row optional.

    The step time is the first sample where p_dem departs from its initial value.
    """
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append([float(c) for c in row[:3]])
            except ValueError:
                if lineno == 1:
                    continue
                raise FitError(f"{path}:{lineno}: non-numeric row {row!r}") from None
    if len(rows) < 10:
        raise FitError(f"{path}: need at least 10 samples")
    data = np.array(rows)
    t, p, f = data[:, 0], data[:, 1], data[:, 2]
    dts = np.diff(t)
    dt = float(np.median(dts))
    if np.any(np.abs(dts - dt) > 1e-6 * max(dt, 1.0)):
        raise FitError(f"{path}: samples are not uniformly spaced")
    changed = np.flatnonzero(p != p[0])
    if changed.size == 0:
        raise FitError(f"{path}: p_dem never changes")
    k = changed[0]
    if step_time is None:
        step_time = float(t[k] - t[0])
    return StepExperiment(dt, float(p[0]), float(p[-1]), f, step_time)

"""Thrust/power reduction metrics and the descending-bound sweep."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .scenario import Scenario
from .simulate import SimLog, run, steady_thrust


@dataclass(frozen=True)
class Metrics:
    thrust_reduction_pct: float
    power_reduction_pct: float
    max_power_loss: float  # W

    @property
    def ratio(self) -> float:
        if self.thrust_reduction_pct == 0:
            return math.nan
        return self.power_reduction_pct / self.thrust_reduction_pct


def metrics(log: SimLog, baseline: SimLog, settle_time: float = 100.0) -> Metrics:
    """Reductions of the settled-window means relative to ``baseline``."""
    if log.t.shape != baseline.t.shape or not np.array_equal(log.t, baseline.t):
        raise ValueError("logs are not aligned on the same time grid")
    m = log.settled(settle_time)
    if not m.any():
        raise ValueError(f"no samples after settle_time={settle_time}")
    f0, f1 = baseline.f_true[m].mean(), log.f_true[m].mean()
    p0, p1 = baseline.p_gen[m].mean(), log.p_gen[m].mean()
    loss = float(np.max(baseline.p_gen[m] - log.p_gen[m]))
    return Metrics(float(100.0 * (f0 - f1) / f0), float(100.0 * (p0 - p1) / p0), max(loss, 0.0))


def _run_bound(args):
    scenario, bound = args
    return run(scenario, thrust_bound=bound)


@dataclass(frozen=True)
class SweepRow:
    thrust_ref: float
    metrics: Metrics


def sweep(base: Scenario, thrust_refs, workers: int = 1) -> list[SweepRow]:
    """Run the governor-disabled baseline and one constrained run per bound.

    A bound of ``inf`` is the unconstrained row and reports zero reductions.
    """
    baseline = run(replace(base, governor=replace(base.governor, enabled=False)))
    constrained = replace(base, governor=replace(base.governor, enabled=True))
    refs = [float(r) for r in thrust_refs]
    finite = [r for r in refs if math.isfinite(r)]
    jobs = [(constrained, r) for r in finite]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            logs = list(pool.map(_run_bound, jobs))
    else:
        logs = [_run_bound(j) for j in jobs]
    by_ref = dict(zip(finite, logs))
    rows = []
    for r in refs:
        if math.isfinite(r):
            rows.append(SweepRow(r, metrics(by_ref[r], baseline, base.settle_time)))
        else:
            rows.append(SweepRow(r, Metrics(0.0, 0.0, 0.0)))
    return rows


def fractional_refs(base: Scenario, fractions) -> list[float]:
    """Thrust bounds as fractions of the unconstrained steady thrust."""
    f0 = steady_thrust(base)
    return [f * f0 for f in fractions]


def write_sweep_csv(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["F_T_ref [N]", "thrust_reduction [%]", "power_reduction [%]", "max_power_loss [W]", "ratio [-]"])
        for row in rows:
            m = row.metrics
            w.writerow([repr(row.thrust_ref), f"{m.thrust_reduction_pct:.4f}", f"{m.power_reduction_pct:.4f}",
                        f"{m.max_power_loss:.1f}", f"{m.ratio:.4f}"])
    return path


# reference rows (bound kN, thrust reduction %, max power loss MW, power reduction %);
# obtained on a high-fidelity plant, kept for trend comparison only
REFERENCE_TABLE = (
    (500.0, 2.35, 0.0750, 2.1),
    (475.0, 7.23, 0.2175, 6.2),
    (450.0, 12.12, 0.3826, 10.9),
    (425.0, 16.99, 0.5382, 15.4),
)
REFERENCE_UNCONSTRAINED_KN = 512.0
# same bounds relative to the unconstrained thrust, for sweeps on other plants
REFERENCE_FRACTIONS = tuple(row[0] / REFERENCE_UNCONSTRAINED_KN for row in REFERENCE_TABLE)

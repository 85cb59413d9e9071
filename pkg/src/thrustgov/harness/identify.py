"""Demanded-power step experiment on the simulated plant."""

from __future__ import annotations

from dataclasses import replace

from ..sysid import FitResult, StepExperiment, fit_first_order
from .scenario import GovernorSettings, PowerReference, Scenario
from .simulate import SimLog, run


def step_scenario(base: Scenario, p_before: float = 3.0e6, p_after: float = 4.0e6,
                  step_time: float = 50.0, duration: float = 250.0) -> Scenario:
    points = ((0.0, p_before), (step_time, p_before), (step_time + 1e-6, p_after), (duration, p_after))
    return replace(
        base,
        name=f"{base.name}_step",
        duration=duration,
        settle_time=min(base.settle_time, step_time),
        power_reference=PowerReference("schedule", points=points),
        governor=GovernorSettings(enabled=False),
    )


def identify_plant(base: Scenario | None = None, p_before: float = 3.0e6, p_after: float = 4.0e6,
                   step_time: float = 50.0, duration: float = 250.0, lead: float = 20.0
                   ) -> tuple[FitResult, SimLog]:
    """Step p_dem on the nonlinear plant and fit the first-order model to the true thrust.

    The fit window starts ``lead`` seconds before the step.
    """
    sc = step_scenario(base or Scenario(), p_before, p_after, step_time, duration)
    lg = run(sc)
    m = lg.t >= step_time - lead
    exp = StepExperiment(lg.dt, p_before, p_after, lg.f_true[m], lead)
    return fit_first_order(exp), lg

"""Command-line entry point: simulate, sweep, tune, analyze, sysid."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .governor import PlantModel, UnstableLoopError, default_freq_grid, loop_analysis, tune_pi
from .sysid import FitError, fit_first_order, load_step_csv

log = logging.getLogger("thrustgov")


def _scenario(args):
    from .harness.scenario import load_scenario

    sc = load_scenario(args.scenario)
    if args.seed is not None:
        sc = sc.with_seed(args.seed)
    return sc


def _out_dir(args, default="out") -> Path:
    return Path(args.out_dir or default)


def cmd_simulate(args) -> int:
    from .harness.simulate import run

    sc = _scenario(args)
    out = _out_dir(args, sc.out_dir)
    lg = run(sc)
    path = lg.to_csv(out / f"{sc.name}.csv")
    m = lg.settled(sc.settle_time)
    print(f"wrote {path}")
    print(f"settled mean P_gen = {lg.p_gen[m].mean():.6g} W, F_true = {lg.f_true[m].mean():.6g} N, "
          f"F_hat = {lg.f_hat[m].mean():.6g} N")
    if math.isfinite(lg.thrust_bound):
        print(f"thrust bound = {lg.thrust_bound:.6g} N, governor transitions = {lg.active_transitions(m)}")
    if args.svg or sc.svg:
        from .harness.plots import write_svgs

        for p in write_svgs(lg, out, sc.name):
            print(f"wrote {p}")
    return 0


def cmd_sweep(args) -> int:
    from .harness.metrics import fractional_refs, sweep, write_sweep_csv

    sc = _scenario(args)
    if args.thrust_refs:
        refs = [float(x) for x in args.thrust_refs]
    else:
        from .harness.metrics import REFERENCE_FRACTIONS

        refs = fractional_refs(sc, REFERENCE_FRACTIONS)
    rows = sweep(sc, refs, workers=args.workers)
    path = write_sweep_csv(rows, _out_dir(args, sc.out_dir) / f"{sc.name}_sweep.csv")
    print(f"{'F_ref [kN]':>10} {'thrust %':>9} {'power %':>8} {'max loss [MW]':>14} {'ratio':>6}")
    for r in rows:
        m = r.metrics
        print(f"{r.thrust_ref / 1e3:10.1f} {m.thrust_reduction_pct:9.2f} {m.power_reduction_pct:8.2f} "
              f"{m.max_power_loss / 1e6:14.4f} {m.ratio:6.3f}")
    print(f"wrote {path}")
    return 0


def cmd_tune(args) -> int:
    model = PlantModel(args.a, args.b)
    wn, ki = tune_pi(model, args.zeta, args.kp)
    print(f"omega_n = {wn:.6g} rad/s")
    print(f"K_I     = {ki:.6g}")
    print(f"K_P     = {args.kp:.6g}")
    return 0


def cmd_analyze(args) -> int:
    model = PlantModel(args.a, args.b)
    rep = loop_analysis(model, args.kp, args.ki, default_freq_grid())
    print(rep.summary())
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "loop_analysis.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["f [Hz]", "|L| [dB]", "arg L [deg]", "|S| [dB]", "|T| [dB]"])
        for row in rep.rows():
            w.writerow([f"{x:.8g}" for x in row])
    print(f"wrote {path}")
    return 0


def cmd_sysid(args) -> int:
    exp = load_step_csv(args.csv, args.step_time)
    res = fit_first_order(exp)
    print(res.summary())
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    path = out / (Path(args.csv).stem + "_residuals.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t [s]", "thrust [N]", "residual [N]"])
        for t, y, r in zip(exp.times, exp.thrust_series, res.residuals):
            w.writerow([f"{t:.6g}", repr(float(y)), repr(float(r))])
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thrustgov", description="Thrust-constrained wind turbine control simulator")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out-dir", default=None, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario and write its log CSV")
    s.add_argument("scenario")
    s.add_argument("--svg", action="store_true", help="also write SVG plots")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="baseline plus one constrained run per thrust bound")
    s.add_argument("scenario")
    s.add_argument("--thrust-refs", nargs="+", metavar="N",
                   help="thrust bounds in N ('inf' allowed); default: the four reference bounds scaled to this plant")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("tune", help="pole-placement PI gains for a first-order plant")
    s.add_argument("--a", type=float, required=True, help="plant gain A [N/(W s)]")
    s.add_argument("--b", type=float, required=True, help="plant pole B [1/s]")
    s.add_argument("--zeta", type=float, default=0.7)
    s.add_argument("--kp", type=float, default=0.0)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("analyze", help="loop margins and frequency-response CSV")
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--kp", type=float, default=0.0)
    s.add_argument("--ki", type=float, required=True)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sysid", help="fit a first-order model to a step CSV (t, p_dem, thrust)")
    s.add_argument("csv")
    s.add_argument("--step-time", type=float, default=None, help="step time relative to the first sample")
    s.set_defaults(func=cmd_sysid)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, UnstableLoopError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

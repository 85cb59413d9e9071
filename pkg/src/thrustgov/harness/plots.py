"""Optional SVG plots of a run (power and thrust against time). Needs matplotlib."""

from __future__ import annotations

import math
from pathlib import Path

from .simulate import SimLog


def write_svgs(log: SimLog, out_dir, stem: str = "run") -> list[Path]:
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("SVG output needs matplotlib (pip install matplotlib)") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(log.t, log.p_ref / 1e6, "k--", lw=1, label="P_ref")
    ax.plot(log.t, log.p_dem / 1e6, lw=1, label="P_dem")
    ax.plot(log.t, log.p_gen / 1e6, lw=1, label="P_gen")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("power [MW]")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    paths.append(out_dir / f"{stem}_power.svg")
    fig.savefig(paths[-1])
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(log.t, log.f_true / 1e3, lw=1, label="F_true")
    ax.plot(log.t, log.f_hat / 1e3, lw=1, label="F_hat")
    if math.isfinite(log.thrust_bound):
        ax.axhline(log.thrust_bound / 1e3, color="r", ls="--", lw=1, label="bound")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("thrust [kN]")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    paths.append(out_dir / f"{stem}_thrust.svg")
    fig.savefig(paths[-1])
    plt.close(fig)
    return paths

"""Tabulated power and thrust coefficient surfaces Cp(lambda, theta), Ct(lambda, theta).

Pitch is stored in radians. CSV files and the parametric model work in degrees.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

BETZ_LIMIT = 16.0 / 27.0
CT_MAX = 2.0


class SurfaceError(ValueError):
    """Raised for surfaces or surface files that violate the table invariants."""


class InfeasibleRequest(ValueError):
    """Raised when no grid point reaches the requested power coefficient."""


class LocusPoint(NamedTuple):
    lam: float
    theta: float
    ct: float
    cp: float


class AeroSurface:
    """Immutable pair of coefficient tables on a shared (lambda, theta) grid.

    Lookups use bilinear interpolation and clamp queries to the grid edges.
    """

    def __init__(self, lambda_grid, theta_grid, cp_table, ct_table):
        lam = np.array(lambda_grid, dtype=float)
        th = np.array(theta_grid, dtype=float)
        cp = np.array(cp_table, dtype=float)
        ct = np.array(ct_table, dtype=float)
        _check_grid(lam, "lambda")
        _check_grid(th, "theta")
        for name, tab in (("cp", cp), ("ct", ct)):
            if tab.shape != (lam.size, th.size):
                raise SurfaceError(
                    f"{name}_table shape {tab.shape} does not match grids ({lam.size}, {th.size})"
                )
            if not np.all(np.isfinite(tab)):
                raise SurfaceError(f"{name}_table contains non-finite values")
        _check_bounds(cp, 0.0, BETZ_LIMIT, "cp")
        _check_bounds(ct, 0.0, CT_MAX, "ct")

        for arr in (lam, th, cp, ct):
            arr.setflags(write=False)
        self.lambda_grid = lam
        self.theta_grid = th
        self.cp_table = cp
        self.ct_table = ct
        # plain-python copies: the simulation loop does millions of scalar lookups
        self._lam = lam.tolist()
        self._th = th.tolist()
        self._cp = cp.tolist()
        self._ct = ct.tolist()

    def __repr__(self):
        return (
            f"AeroSurface(lambda=[{self._lam[0]:g}..{self._lam[-1]:g}] x{len(self._lam)}, "
            f"theta=[{math.degrees(self._th[0]):g}..{math.degrees(self._th[-1]):g}] deg x{len(self._th)})"
        )

    def cp(self, lam: float, theta: float) -> float:
        return self._lookup(self._cp, lam, theta)

    def ct(self, lam: float, theta: float) -> float:
        return self._lookup(self._ct, lam, theta)

    def _lookup(self, table, lam, theta):
        lg, tg = self._lam, self._th
        i, fx = _locate(lg, lam)
        j, fy = _locate(tg, theta)
        r0, r1 = table[i], table[i + 1]
        lo = r0[j] + fy * (r0[j + 1] - r0[j])
        hi = r1[j] + fy * (r1[j + 1] - r1[j])
        return lo + fx * (hi - lo)

    def max_cp(self) -> LocusPoint:
        """Grid point with the largest power coefficient."""
        i, j = np.unravel_index(np.argmax(self.cp_table), self.cp_table.shape)
        return LocusPoint(
            float(self.lambda_grid[i]),
            float(self.theta_grid[j]),
            float(self.ct_table[i, j]),
            float(self.cp_table[i, j]),
        )


def _locate(grid, x):
    n = len(grid)
    if x <= grid[0]:
        return 0, 0.0
    if x >= grid[-1]:
        return n - 2, 1.0
    i = bisect_right(grid, x) - 1
    return i, (x - grid[i]) / (grid[i + 1] - grid[i])


def _check_grid(grid, name):
    if grid.ndim != 1 or grid.size < 2:
        raise SurfaceError(f"{name} grid needs at least 2 points")
    if not np.all(np.isfinite(grid)):
        raise SurfaceError(f"{name} grid contains non-finite values")
    bad = np.flatnonzero(np.diff(grid) <= 0)
    if bad.size:
        raise SurfaceError(f"{name} grid not strictly increasing at index {bad[0] + 1}")


def _check_bounds(table, lo, hi, name):
    bad = np.argwhere((table < lo) | (table > hi))
    if bad.size:
        i, j = bad[0]
        raise SurfaceError(f"{name} value {table[i, j]:g} at row {i}, column {j} outside [{lo:g}, {hi:.3f}]")


def cp(surface: AeroSurface, lam: float, theta: float) -> float:
    return surface.cp(lam, theta)


def ct(surface: AeroSurface, lam: float, theta: float) -> float:
    return surface.ct(lam, theta)


@dataclass(frozen=True)
class ParametricCoeffs:
    """Coefficients of the exponential Cp model and the Ct/Cp ratio curve.

    Cp = c1*(c2/li - c3*th - c4)*exp(-c5/li) + c6*lam with
    1/li = 1/(lam + 0.08*th) - 0.035/(1 + th**3), th in degrees.
    Ct = Cp * ct_opt/cp_opt * (lam/lam_opt)**ct_exponent, made non-increasing in pitch.
    """

    c1: float = 0.5176
    c2: float = 116.0
    c3: float = 0.4
    c4: float = 5.0
    c5: float = 21.0
    c6: float = 0.0068
    ct_opt: float = 0.78
    ct_exponent: float = 0.5


DEFAULT_LAMBDA_GRID = np.round(np.arange(1.0, 15.0 + 1e-9, 0.25), 10)
DEFAULT_THETA_GRID_DEG = np.round(np.arange(0.0, 25.0 + 1e-9, 0.5), 10)


def raw_cp(coeffs: ParametricCoeffs, lam, theta_deg):
    """Unclamped analytic power coefficient; theta in degrees."""
    lam = np.asarray(lam, dtype=float)
    th = np.asarray(theta_deg, dtype=float)
    inv_li = 1.0 / (lam + 0.08 * th) - 0.035 / (1.0 + th**3)
    return coeffs.c1 * (coeffs.c2 * inv_li - coeffs.c3 * th - coeffs.c4) * np.exp(-coeffs.c5 * inv_li) + coeffs.c6 * lam


def parametric_surface(
    coeffs: ParametricCoeffs | None = None,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    theta_grid_deg=DEFAULT_THETA_GRID_DEG,
) -> AeroSurface:
    coeffs = coeffs or ParametricCoeffs()
    lam = np.asarray(lambda_grid, dtype=float)
    th_deg = np.asarray(theta_grid_deg, dtype=float)
    L, T = np.meshgrid(lam, th_deg, indexing="ij")
    cp_raw = raw_cp(coeffs, L, T)
    if cp_raw.max() > BETZ_LIMIT:
        raise SurfaceError(f"coefficients give max Cp {cp_raw.max():.4f} above the Betz limit")
    if cp_raw.max() <= 0.0:
        raise SurfaceError("coefficients give non-positive Cp everywhere")
    cp_tab = np.clip(cp_raw, 0.0, BETZ_LIMIT)

    i, j = np.unravel_index(np.argmax(cp_tab), cp_tab.shape)
    lam_opt, cp_opt = lam[i], cp_tab[i, j]
    ratio = coeffs.ct_opt / cp_opt * (lam / lam_opt) ** coeffs.ct_exponent
    ct_tab = cp_tab * ratio[:, None]
    # thrust must not grow with pitch at fixed tip-speed ratio
    ct_tab = np.minimum.accumulate(ct_tab, axis=1)
    ct_tab = np.clip(ct_tab, 0.0, CT_MAX)
    return AeroSurface(lam, np.radians(th_deg), cp_tab, ct_tab)


def min_ct_locus(surface: AeroSurface, cp_required: float) -> LocusPoint:
    """Grid point of least Ct among those with Cp >= cp_required."""
    if not cp_required > 0.0:
        raise ValueError(f"cp_required must be positive, got {cp_required}")
    feasible = surface.cp_table >= cp_required
    if not feasible.any():
        raise InfeasibleRequest(
            f"cp_required={cp_required:g} exceeds the surface maximum {surface.cp_table.max():.4f}"
        )
    ct_masked = np.where(feasible, surface.ct_table, np.inf)
    i, j = np.unravel_index(np.argmin(ct_masked), ct_masked.shape)
    return LocusPoint(
        float(surface.lambda_grid[i]),
        float(surface.theta_grid[j]),
        float(surface.ct_table[i, j]),
        float(surface.cp_table[i, j]),
    )


def sibling_paths(path) -> tuple[Path, Path]:
    """Cp and Ct file paths for a surface stem, e.g. ``rotor`` -> rotor_cp.csv, rotor_ct.csv."""
    path = Path(path)
    stem = path.name
    for suffix in ("_cp.csv", "_ct.csv", ".csv"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    return path.with_name(f"{stem}_cp.csv"), path.with_name(f"{stem}_ct.csv")


def save_surface(surface: AeroSurface, path) -> tuple[Path, Path]:
    cp_path, ct_path = sibling_paths(path)
    th_deg = np.degrees(surface.theta_grid)
    for p, tab in ((cp_path, surface.cp_table), (ct_path, surface.ct_table)):
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda\\theta"] + [repr(float(t)) for t in th_deg])
            for lam, row in zip(surface.lambda_grid, tab):
                w.writerow([repr(float(lam))] + [repr(float(v)) for v in row])
    return cp_path, ct_path


def _read_table(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if len(rows) < 3:
        raise SurfaceError(f"{path}: need a header row and at least 2 data rows")
    try:
        theta = [float(c) for c in rows[0][1:]]
    except ValueError as exc:
        raise SurfaceError(f"{path}: row 0: non-numeric pitch header ({exc})") from None
    lam, table = [], []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(theta) + 1:
            raise SurfaceError(f"{path}: row {r}: expected {len(theta) + 1} columns, found {len(row)}")
        vals = []
        for c, cell in enumerate(row):
            try:
                vals.append(float(cell))
            except ValueError:
                raise SurfaceError(f"{path}: row {r}, column {c}: non-numeric value {cell!r}") from None
        lam.append(vals[0])
        table.append(vals[1:])
    return np.array(lam), np.array(theta), np.array(table)


def load_surface(path) -> AeroSurface:
    """Load a surface from sibling ``<stem>_cp.csv`` / ``<stem>_ct.csv`` files.

    Each file has a header row ``lambda\\theta, th1, th2, ...`` (degrees) followed
    by one row per tip-speed ratio. Errors name the offending row and column.
    """
    cp_path, ct_path = sibling_paths(path)
    lam, th_deg, cp_tab = _read_table(cp_path)
    lam2, th2, ct_tab = _read_table(ct_path)
    for name, g, p in (("lambda", lam, cp_path), ("theta", th_deg, cp_path)):
        bad = np.flatnonzero(np.diff(g) <= 0)
        if bad.size:
            where = f"row {bad[0] + 2}, column 0" if name == "lambda" else f"row 0, column {bad[0] + 2}"
            raise SurfaceError(f"{p}: {name} grid not strictly increasing at index {bad[0] + 1} ({where})")
    if lam.shape != lam2.shape or not np.array_equal(lam, lam2) or not np.array_equal(th_deg, th2):
        raise SurfaceError(f"{ct_path}: grid does not match {cp_path}")
    for p, tab, hi, name in ((cp_path, cp_tab, BETZ_LIMIT, "Cp"), (ct_path, ct_tab, CT_MAX, "Ct")):
        bad = np.argwhere((tab < 0.0) | (tab > hi) | ~np.isfinite(tab))
        if bad.size:
            i, j = bad[0]
            raise SurfaceError(
                f"{p}: row {i + 1}, column {j + 1}: {name} value {tab[i, j]:g} outside [0, {hi:.3f}]"
            )
    return AeroSurface(lam, np.radians(th_deg), cp_tab, ct_tab)

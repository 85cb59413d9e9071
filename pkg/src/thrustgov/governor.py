"""Switching PI thrust governor.

The governor compares the thrust estimate with its bound and, only while the
bound is violated or the accumulated violation has not yet been paid back,
feeds the error through a PI law whose output ``u`` is subtracted from the
power reference. Loop-design helpers assume the first-order model
F_T(s)/P_dem(s) = a/(s + b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .turbine import SimulationError

INTEGRAL = "integral"
SIGN = "sign"


class UnstableLoopError(ValueError):
    """Closed-loop characteristic polynomial has a root with non-negative real part."""

    def __init__(self, poles):
        self.poles = np.asarray(poles)
        super().__init__(f"closed loop unstable, poles: {', '.join(f'{p:.4g}' for p in self.poles)}")


@dataclass(frozen=True)
class PlantModel:
    """Demanded power [W] to thrust [N]: a/(s + b); a in N/(W s), b in 1/s."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"plant model needs a > 0 and b > 0, got a={self.a}, b={self.b}")

    @property
    def dc_gain(self) -> float:
        return self.a / self.b


@dataclass(frozen=True)
class GovernorConfig:
    """Thrust bound and PI gains.

    ``kp`` in W/N, ``ki`` in W/(N s). ``u_max`` of None caps the override at
    p_ref - p_min each step. ``switching`` selects the integral switching law
    or the plain sign switch kept for comparison.
    """

    f_t_ref: float
    ki: float
    kp: float = 0.0
    u_max: float | None = None
    p_min: float = 1.0e6
    thrust_ref_offset: float = 0.0
    switching: str = INTEGRAL

    def __post_init__(self):
        if not self.f_t_ref > 0:
            raise ValueError("thrust bound f_t_ref must be positive")
        if not self.ki > 0:
            raise ValueError("ki must be positive")
        if self.kp < 0:
            raise ValueError("kp must be non-negative")
        if self.u_max is not None and self.u_max < 0:
            raise ValueError("u_max must be non-negative")
        if self.switching not in (INTEGRAL, SIGN):
            raise ValueError(f"unknown switching law {self.switching!r}")


@dataclass(frozen=True)
class GovernorState:
    e_i: float = 0.0
    u: float = 0.0
    active: bool = False


def switch_error(e: float, e_i: float) -> float:
    """Pass ``e`` while the bound is violated or past violation is not yet unwound."""
    return e if (e < 0 or e_i < 0) else 0.0


def governor_update(
    config: GovernorConfig, state: GovernorState, f_hat: float, p_ref: float, dt: float
) -> tuple[float, GovernorState]:
    """One sample of the governor; returns (p_dem, new_state)."""
    if not (math.isfinite(f_hat) and math.isfinite(p_ref)):
        raise SimulationError(f"non-finite governor input: f_hat={f_hat}, p_ref={p_ref}")
    e = config.f_t_ref + config.thrust_ref_offset - f_hat
    if config.switching == SIGN:
        closed = e < 0
    else:
        closed = e < 0 or state.e_i < 0
    # an exactly zero error on a closed loop must not reset it
    e_sw = switch_error(e, state.e_i) if config.switching == INTEGRAL else (e if closed else 0.0)

    if not closed:
        # loop open: integral held at zero, no override
        return p_ref, GovernorState(0.0, 0.0, False)

    u_max = config.u_max if config.u_max is not None else max(p_ref - config.p_min, 0.0)
    e_i = min(state.e_i + e_sw * dt, 0.0)
    u = -(config.kp * e_sw + config.ki * e_i)
    if u > u_max and e_sw < 0:
        e_i = state.e_i  # conditional integration: hold while pushing into the cap
    u = min(max(u, 0.0), u_max)
    return p_ref - u, GovernorState(e_i, u, True)


def tune_pi(model: PlantModel, zeta: float, kp: float = 0.0) -> tuple[float, float]:
    """Match s^2 + (b + kp a) s + ki a to s^2 + 2 zeta wn s + wn^2; returns (wn, ki)."""
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    if kp < 0:
        raise ValueError("kp must be non-negative")
    wn = (model.b + kp * model.a) / (2.0 * zeta)
    return float(wn), float(wn**2 / model.a)


def closed_loop_poles(model: PlantModel, kp: float, ki: float) -> np.ndarray:
    return np.roots([1.0, model.b + kp * model.a, ki * model.a])


def _jw_poly(coeffs):
    # p(s) -> coefficients of p(j w) as a polynomial in w
    c = np.asarray(coeffs, dtype=complex)
    powers = np.arange(len(c) - 1, -1, -1)
    return c * (1j) ** powers


def _real_positive_roots(poly, eps=1e-12):
    poly = np.trim_zeros(np.real_if_close(poly, tol=1e6).astype(float), "f")
    if poly.size <= 1:
        return np.array([])
    r = np.roots(poly)
    r = r[np.abs(r.imag) <= 1e-9 * np.maximum(1.0, np.abs(r.real))].real
    return np.sort(r[r > eps])


@dataclass
class LoopReport:
    freq_hz: np.ndarray
    mag_l_db: np.ndarray
    phase_l_deg: np.ndarray
    mag_s_db: np.ndarray
    mag_t_db: np.ndarray
    gain_margin: float
    phase_crossover_hz: float
    phase_margin_deg: float
    crossover_hz: float
    crossover_plus20_hz: float
    crossover_minus20_hz: float
    t0: float
    steady_state_errors: list = field(default_factory=list)
    poles: np.ndarray = field(default_factory=lambda: np.array([]))

    def summary(self) -> str:
        gm = "inf" if math.isinf(self.gain_margin) else f"{20 * math.log10(self.gain_margin):.2f} dB"
        ess = ", ".join(f"{v:g}" for v in self.steady_state_errors)
        return "\n".join([
            f"gain margin           : {gm}",
            f"phase margin          : {self.phase_margin_deg:.2f} deg at {self.crossover_hz:.4f} Hz",
            f"|L| = +20 dB crossing : {self.crossover_plus20_hz:.4f} Hz",
            f"|L| = -20 dB crossing : {self.crossover_minus20_hz:.4f} Hz",
            f"T(0)                  : {self.t0:g}",
            f"steady-state errors   : [{ess}]",
            f"closed-loop poles     : {', '.join(f'{p:.4g}' for p in self.poles)}",
        ])

    def rows(self):
        return zip(self.freq_hz, self.mag_l_db, self.phase_l_deg, self.mag_s_db, self.mag_t_db)


def loop_analysis(model: PlantModel, kp: float, ki: float, freq_hz) -> LoopReport:
    """Frequency response of L = K G, S and T, with margins and steady-state errors.

    Margins and crossings are computed from polynomial roots, not from the grid.
    """
    freq_hz = np.asarray(freq_hz, dtype=float)
    if freq_hz.ndim != 1 or freq_hz.size == 0 or np.any(freq_hz <= 0) or np.any(np.diff(freq_hz) <= 0):
        raise ValueError("frequency grid must be positive and strictly increasing")
    poles = closed_loop_poles(model, kp, ki)
    if np.any(poles.real >= 0):
        raise UnstableLoopError(poles)

    num = np.array([kp * model.a, ki * model.a])
    den = np.array([1.0, model.b, 0.0])
    zeros = np.roots(num) if kp > 0 else np.array([])
    ol_poles = np.roots(den)
    gain = num[0] if kp > 0 else num[1]

    def phase_deg(w):
        # continuous phase from factor angles, no wrapping
        s = 1j * np.asarray(w, dtype=float)
        ph = np.zeros_like(np.asarray(w, dtype=float))
        for z in zeros:
            ph = ph + np.angle(s - z)
        for p in ol_poles:
            ph = ph - np.angle(s - p) if p != 0 else ph - np.pi / 2
        if gain < 0:
            ph = ph - np.pi
        return np.degrees(ph)

    w = 2 * np.pi * freq_hz
    s = 1j * w
    L = np.polyval(num, s) / np.polyval(den, s)
    S = 1.0 / (1.0 + L)
    T = L / (1.0 + L)

    nj, dj = _jw_poly(num), _jw_poly(den)
    n2 = np.polymul(nj, np.conj(nj))
    d2 = np.polymul(dj, np.conj(dj))

    def crossing(level_db):
        k = 10 ** (level_db / 20.0)
        r = _real_positive_roots(np.polysub(n2, k * k * d2))
        return r[0] / (2 * np.pi) if r.size else math.nan

    wc = crossing(0.0) * 2 * np.pi
    pm = 180.0 + float(phase_deg(wc)) if math.isfinite(wc) else math.inf

    # phase crossover: Im(N(jw) conj(D(jw))) = 0 with Re < 0
    cross = np.polymul(nj, np.conj(dj))
    gm, w180 = math.inf, math.nan
    for wp in _real_positive_roots(cross.imag):
        lp = np.polyval(num, 1j * wp) / np.polyval(den, 1j * wp)
        if lp.real < 0 and 1.0 / abs(lp) < gm:
            gm, w180 = 1.0 / abs(lp), wp / (2 * np.pi)

    if ki > 0:
        t0 = 1.0
    else:
        t0 = kp * model.a / (model.b + kp * model.a)
    s0 = 1.0 - t0
    ess = [t0 - 1.0, s0 * model.dc_gain, s0, -t0]

    return LoopReport(
        freq_hz=freq_hz,
        mag_l_db=20 * np.log10(np.abs(L)),
        phase_l_deg=phase_deg(w),
        mag_s_db=20 * np.log10(np.abs(S)),
        mag_t_db=20 * np.log10(np.abs(T)),
        gain_margin=gm,
        phase_crossover_hz=w180,
        phase_margin_deg=pm,
        crossover_hz=wc / (2 * np.pi),
        crossover_plus20_hz=crossing(20.0),
        crossover_minus20_hz=crossing(-20.0),
        t0=t0,
        steady_state_errors=ess,
        poles=poles,
    )


def default_freq_grid(lo_hz=1e-4, hi_hz=10.0, n=400) -> np.ndarray:
    return np.logspace(math.log10(lo_hz), math.log10(hi_hz), n)


@dataclass
class BenchResult:
    t: np.ndarray
    thrust: np.ndarray
    thrust_ref: np.ndarray
    u: np.ndarray
    active: np.ndarray

    @property
    def error(self) -> np.ndarray:
        return self.thrust - self.thrust_ref


def simulate_linear_bench(
    model: PlantModel,
    kp: float,
    ki: float,
    duration: float = 60.0,
    dt: float = 0.01,
    f_ref=0.0,
    p_ref=0.0,
    wind=0.0,
    bias=0.0,
    thrust_offset: float = 0.0,
    wind_path: tuple[float, float] = (1.0, 1.0),
    governor: GovernorConfig | None = None,
    start_steady: bool = False,
) -> BenchResult:
    """Sampled loop around the first-order plant with exact zero-order-hold updates.

    F_T = G (P_ref - u) + G_w v with G_w = wind_path[0]/(s + wind_path[1]). The
    thrust seen by the controller is F_T + n. Inputs are constants or callables
    of time. ``thrust_offset`` is added to the plant output. ``start_steady``
    starts both plant states at equilibrium with the t=0 inputs. With ``governor`` None the PI runs unswitched and unclamped;
    otherwise ``governor_update`` closes the loop with the given config.
    """

    def as_fn(x):
        return x if callable(x) else (lambda t, _x=float(x): _x)

    f_ref, p_ref, wind, bias = map(as_fn, (f_ref, p_ref, wind, bias))
    n = int(round(duration / dt))
    ab = math.exp(-model.b * dt)
    gw, bw = wind_path
    aw = math.exp(-bw * dt)
    x_p = x_w = 0.0
    if start_steady:
        x_p = model.dc_gain * p_ref(0.0)
        x_w = gw / bw * wind(0.0)
    z = 0.0
    gstate = GovernorState()
    t_out = np.arange(n + 1) * dt
    thrust = np.empty(n + 1)
    ref = np.empty(n + 1)
    u_out = np.empty(n + 1)
    act = np.zeros(n + 1, dtype=bool)
    for k in range(n + 1):
        t = k * dt
        f = x_p + x_w + thrust_offset
        thrust[k] = f
        f_hat = f + bias(t)
        pr = p_ref(t)
        if governor is None:
            ref[k] = f_ref(t)
            e = ref[k] - f_hat
            z += e * dt
            u = -(kp * e + ki * z)
            p_dem = pr - u
            active = True
        else:
            ref[k] = governor.f_t_ref + governor.thrust_ref_offset
            p_dem, gstate = governor_update(governor, gstate, f_hat, pr, dt)
            u, active = gstate.u, gstate.active
        u_out[k] = u
        act[k] = active
        x_p = ab * x_p + (1.0 - ab) * model.dc_gain * p_dem
        x_w = aw * x_w + (1.0 - aw) * (gw / bw) * wind(t)
    return BenchResult(t_out, thrust, ref, u_out, act)

import math

import numpy as np
import pytest

from thrustgov.governor import (
    INTEGRAL,
    SIGN,
    GovernorConfig,
    GovernorState,
    PlantModel,
    UnstableLoopError,
    default_freq_grid,
    governor_update,
    loop_analysis,
    simulate_linear_bench,
    switch_error,
    tune_pi,
)

DESIGN = PlantModel(0.067625, 0.625)
KI = 2.947


@pytest.mark.parametrize("e, e_i, expected", [
    (-1.0e4, 0.0, -1.0e4),
    (5.0e3, -2.0e3, 5.0e3),
    (5.0e3, 3.0e3, 0.0),
    (0.0, 0.0, 0.0),
])
def test_switch_error(e, e_i, expected):
    assert switch_error(e, e_i) == expected


def test_passive_when_below_bound():
    cfg = GovernorConfig(f_t_ref=6e5, ki=KI)
    st = GovernorState()
    for f in np.linspace(0, 5.9e5, 50):
        p, st = governor_update(cfg, st, f, 4e6, 0.01)
        assert p == 4e6
        assert st == GovernorState()


def test_single_step_integral_arithmetic():
    cfg = GovernorConfig(f_t_ref=6e5, ki=KI)
    p, st = governor_update(cfg, GovernorState(), 6.5e5, 4e6, 0.01)
    assert st.u == pytest.approx(1473.5, rel=1e-12)
    assert p == pytest.approx(4e6 - 1473.5, rel=1e-12)
    assert st.active


def test_override_capped_and_integrator_frozen():
    cfg = GovernorConfig(f_t_ref=6e5, ki=KI, p_min=1e6)
    st = GovernorState()
    for _ in range(5000):
        p, st = governor_update(cfg, st, 9e5, 4e6, 0.01)
    assert p == pytest.approx(1e6)
    frozen = st.e_i
    p, st = governor_update(cfg, st, 9e5, 4e6, 0.01)
    assert st.e_i == frozen


def test_loop_reopens_after_unwinding():
    cfg = GovernorConfig(f_t_ref=6e5, ki=KI)
    st = GovernorState()
    for _ in range(100):
        _, st = governor_update(cfg, st, 6.1e5, 4e6, 0.01)
    assert st.e_i < 0
    for _ in range(10000):
        p, st = governor_update(cfg, st, 5.9e5, 4e6, 0.01)
        if not st.active:
            break
    assert not st.active
    assert p == 4e6 and st.u == 0.0 and st.e_i == 0.0


def test_sign_switch_opens_immediately():
    cfg = GovernorConfig(f_t_ref=6e5, ki=KI, switching=SIGN)
    _, st = governor_update(cfg, GovernorState(), 6.1e5, 4e6, 0.01)
    assert st.active
    p, st = governor_update(cfg, st, 5.99e5, 4e6, 0.01)
    assert not st.active and p == 4e6


@pytest.mark.parametrize("kwargs", [
    dict(f_t_ref=0.0, ki=1.0),
    dict(f_t_ref=1.0, ki=0.0),
    dict(f_t_ref=1.0, ki=1.0, kp=-1.0),
    dict(f_t_ref=1.0, ki=1.0, switching="bang"),
])
def test_config_invariants(kwargs):
    with pytest.raises(ValueError):
        GovernorConfig(**kwargs)


def test_tune_design_values():
    wn, ki = tune_pi(DESIGN, 0.7)
    assert wn == pytest.approx(0.446429, abs=1e-6)
    assert ki == pytest.approx(2.947112, abs=1e-5)


def test_tune_unit_case():
    assert tune_pi(PlantModel(1.0, 1.0), 0.5) == (1.0, 1.0)


def test_tune_zeta_scaling():
    wn1, ki1 = tune_pi(DESIGN, 0.35)
    wn2, ki2 = tune_pi(DESIGN, 0.7)
    assert wn2 == pytest.approx(wn1 / 2)
    assert ki2 == pytest.approx(ki1 / 4)


def test_tune_places_poles():
    from thrustgov.governor import closed_loop_poles

    for kp in (0.0, 1.0, 5.0):
        wn, ki = tune_pi(DESIGN, 0.8, kp)
        poles = closed_loop_poles(DESIGN, kp, ki)
        assert np.allclose(np.abs(poles), wn)
        assert np.allclose(-poles.real / np.abs(poles), 0.8)


def _closed_form_crossing(k_level):
    # w^4 + B^2 w^2 - (ki A / k)^2 = 0
    K = KI * DESIGN.a / k_level
    b2 = DESIGN.b**2
    return math.sqrt((-b2 + math.sqrt(b2 * b2 + 4 * K * K)) / 2) / (2 * math.pi)


def test_margins_of_design():
    rep = loop_analysis(DESIGN, 0.0, KI, default_freq_grid())
    assert math.isinf(rep.gain_margin)
    assert rep.phase_margin_deg == pytest.approx(65.157, abs=0.01)
    assert rep.crossover_hz == pytest.approx(0.046053, abs=1e-5)
    wc = 2 * math.pi * _closed_form_crossing(1.0)
    assert rep.phase_margin_deg == pytest.approx(90 - math.degrees(math.atan(wc / DESIGN.b)), abs=1e-9)


def test_minus_20db_crossing():
    rep = loop_analysis(DESIGN, 0.0, KI, default_freq_grid())
    assert rep.crossover_minus20_hz == pytest.approx(_closed_form_crossing(0.1), rel=1e-9)
    assert rep.crossover_minus20_hz == pytest.approx(0.214, abs=5e-4)
    assert rep.crossover_plus20_hz == pytest.approx(_closed_form_crossing(10.0), rel=1e-9)


def test_frequency_response_consistency():
    f = default_freq_grid()
    rep = loop_analysis(DESIGN, 0.5, KI, f)
    s = 2j * np.pi * f
    L = (0.5 * DESIGN.a * s + KI * DESIGN.a) / (s * (s + DESIGN.b))
    np.testing.assert_allclose(rep.mag_l_db, 20 * np.log10(np.abs(L)), rtol=1e-12)
    np.testing.assert_allclose(rep.mag_s_db, 20 * np.log10(np.abs(1 / (1 + L))), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(rep.phase_l_deg, np.degrees(np.unwrap(np.angle(L))), atol=1e-9)


@pytest.mark.parametrize("kp, ki", [(0.0, 0.5), (1.0, 2.947), (3.0, 10.0)])
def test_integral_action_gives_unity_t0(kp, ki):
    rep = loop_analysis(DESIGN, kp, ki, default_freq_grid())
    assert rep.t0 == 1.0
    assert rep.steady_state_errors == [0.0, 0.0, 0.0, -1.0]


def test_unstable_rejected():
    with pytest.raises(UnstableLoopError):
        loop_analysis(DESIGN, 0.0, -1.0, default_freq_grid())


@pytest.mark.parametrize("kind", ["f_ref", "p_ref", "wind"])
def test_bench_rejects_unit_steps(kind):
    kw = {kind: (lambda t: 1.0 if t >= 1.0 else 0.0)}
    res = simulate_linear_bench(DESIGN, 0.0, KI, duration=60.0, **kw)
    assert abs(res.error[-1]) < 1e-3


def test_bench_bias_step():
    n0 = 1.0e4
    res = simulate_linear_bench(DESIGN, 0.0, KI, duration=60.0, f_ref=5e5, p_ref=4e6,
                                bias=lambda t: n0 if t >= 1.0 else 0.0, start_steady=True)
    assert res.error[-1] == pytest.approx(-n0, abs=1e-3 * n0)


def test_bench_governor_returns_to_bound():
    # constant power maps to 0.108 N/W * 4 MW = 432.6 kN; a thrust offset pushes it over 450 kN
    cfg = GovernorConfig(f_t_ref=4.5e5, ki=KI, switching=INTEGRAL)
    res = simulate_linear_bench(DESIGN, 0.0, KI, duration=120.0, p_ref=4e6, governor=cfg,
                                thrust_offset=0.0, start_steady=True,
                                wind=lambda t: 5e4 if t >= 10.0 else 0.0, wind_path=(1.0, 1.0))
    assert res.thrust.max() > 4.5e5
    assert res.thrust[-1] == pytest.approx(4.5e5, rel=1e-4)
    assert res.active[-1]

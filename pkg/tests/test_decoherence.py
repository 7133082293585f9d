import math

import numpy as np
import pytest

from qfriction import (
    ZERO_TEMPERATURE,
    ModelParams,
    PerturbativeBreakdown,
    Tolerance,
    bose_occupation,
    decoherence_time,
    decoherence_velocity_sweep,
    f_thermal,
    global_factor,
    im_s1_exact,
    im_s1_smallv,
    plate_term_s1,
    plate_term_s2,
    plate_term_s3,
    resonance_sweep,
)

# Frozen oracle values (qfriction.oracle, default resolution)
S2_V03_B1_ORACLE = 4930.905048200034      # dense hemisphere grid
S3_V05_B1_ORACLE = 1882795.1913442034     # dense k2 grid, continuous sign
IM_S1_V001_B1_ORACLE = 3.1419461366679293

TIGHT = Tolerance(1e-16, 1e-13)


def P(v, beta=ZERO_TEMPERATURE, w=0.03, o=0.01, coupling=0.01, **kw):
    return ModelParams(w, o, v=v, beta=beta, **kw).with_plate_coupling(coupling)


@pytest.mark.parametrize("beta", [ZERO_TEMPERATURE, 10.0, 1.0, 0.1])
def test_im_s1_exact_semicircle_at_rest(beta):
    n = bose_occupation(0.03, beta)
    expected = math.pi * 0.03 * (2 * n + 1) / 2
    assert im_s1_exact(P(0.0, beta), TIGHT).value == pytest.approx(expected, rel=1e-8)


def test_im_s1_exact_matches_oracle():
    assert im_s1_exact(P(0.01, 1.0), TIGHT).value == pytest.approx(IM_S1_V001_B1_ORACLE, rel=1e-12)


def test_small_v_form_tracks_exact_integral():
    p = P(0.01, 1.0)
    # the closed form approximates twice the integral
    assert im_s1_smallv(p) == pytest.approx(2 * im_s1_exact(p, TIGHT).value, rel=1e-3)


def test_small_v_form_error_is_fourth_order():
    def err(v):
        p = P(v, 1.0)
        ex = 2 * im_s1_exact(p, TIGHT).value
        return abs(im_s1_smallv(p) - ex) / ex

    assert err(0.04) / err(0.02) >= 8.0


def test_printed_expansion_is_only_second_order():
    def err(v):
        p = P(v, 1.0)
        ex = 2 * im_s1_exact(p, TIGHT).value
        return abs(im_s1_smallv(p, "printed") - ex) / ex

    assert 3.0 < err(0.04) / err(0.02) < 5.0


def test_small_v_closed_form_values():
    assert im_s1_smallv(P(0.0)) == pytest.approx(math.pi * 0.03, rel=1e-15)
    n = bose_occupation(0.03, 1.0)
    assert im_s1_smallv(P(0.0, 1.0)) == pytest.approx(math.pi * 0.03 * (2 * n + 1), rel=1e-15)
    p = ModelParams(0.03, 0.01, v=0.1, beta=math.log(2.0) / 0.03)
    f = math.log(2.0) / 2 * (8 + 3 * math.log(2.0))
    assert f_thermal(p) == pytest.approx(f, rel=1e-14)
    expected = math.pi * 0.03 * ((1 + 0.01125) * 3 - f * 0.01)
    assert im_s1_smallv(p, "printed") == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ValueError):
        im_s1_smallv(p, "other")


def test_s1_closed_window_is_zero():
    assert plate_term_s1(P(0.1, 1.0)).value == 0.0


def test_s2_matches_oracle():
    r = plate_term_s2(P(0.3, 1.0))
    assert r.converged
    assert r.value == pytest.approx(S2_V03_B1_ORACLE, rel=1e-4)
    assert r.value == pytest.approx(S2_V03_B1_ORACLE, rel=1e-8)


def test_s2_is_continuous_at_rest():
    at_rest = plate_term_s2(P(0.0, 1.0)).value
    assert plate_term_s2(P(1e-4, 1.0)).value == pytest.approx(at_rest, rel=1e-7)
    with pytest.raises(ValueError):
        plate_term_s2(P(0.0, o=0.03))


def test_s3_matches_oracle_and_signs():
    assert plate_term_s3(P(0.5, 1.0)).value == pytest.approx(S3_V05_B1_ORACLE, rel=1e-8)
    # zero temperature, window closed: only the zeta_+ tail, positive
    t0 = plate_term_s3(P(0.5))
    assert t0.value > 0
    assert plate_term_s3(P(0.0, 1.0)).value == 0.0
    with pytest.raises(ValueError):
        plate_term_s3(P(0.5), convention="other")


def test_s3_conventions_differ_by_twice_the_minus_tail():
    p = P(0.5, 1.0)
    cont = plate_term_s3(p, convention="continuous").value
    printed = plate_term_s3(p, convention="printed").value
    from qfriction.friction import exp_lorentzian_tail
    from qfriction import vartheta

    n = bose_occupation(0.01, 1.0)
    minus = exp_lorentzian_tail(0.5, math.sqrt(-vartheta(p))).value
    assert cont - printed == pytest.approx(2 * 0.5 / 0.01 * (2 * n + 1) * minus, rel=1e-8)


def test_decoupled_plate_zero_velocity():
    a = 1e-6
    bd = decoherence_time(P(0.0, coupling=0.0))
    assert bd.t_d == pytest.approx(a / (math.pi * 0.03), rel=1e-15)
    hot = decoherence_time(P(0.0, 1.0, coupling=0.0))
    n = bose_occupation(0.03, 1.0)
    assert hot.t_d == pytest.approx(a / (math.pi * 0.03 * (2 * n + 1)), rel=1e-15)
    assert hot.t_d < bd.t_d


def test_td_is_reciprocal_bracket():
    for v in (0.0, 0.3, 0.7):
        bd = decoherence_time(P(v, 1.0))
        assert bd.t_d == 1.0 / bd.bracket
        assert bd.t_d * bd.bracket == pytest.approx(1.0, rel=2.3e-16, abs=0)
        assert bd.t_d > 0


def test_a_units_factorization():
    base = decoherence_time(P(0.3, 1.0))
    for change in (dict(g_c=2.0), dict(q0=2.0), dict(delta=1.0)):
        other = decoherence_time(P(0.3, 1.0, **change))
        assert other.t_d == base.t_d
        assert other.bracket == base.bracket
    assert global_factor(P(0.3, g_c=2.0, q0=2.0)) == pytest.approx(4 / 16)
    assert global_factor(P(0.3), "amplitude") == 8.0
    assert base.t_d_seconds == pytest.approx(4 * base.t_d / 299792458.0, rel=1e-15)


def test_identical_histories_are_rejected():
    with pytest.raises(ValueError):
        decoherence_time(P(0.3, delta=0.0))


def test_td_non_increasing_in_temperature_at_rest():
    tds = [decoherence_time(P(0.0, b)).t_d for b in (ZERO_TEMPERATURE, 10.0, 1.0, 0.1)]
    assert all(b <= a for a, b in zip(tds, tds[1:]))


def test_breakdown_near_window_edge():
    # O just above w/(1 + v): the window barely opens and the edge terms swamp
    with pytest.raises(PerturbativeBreakdown) as info:
        decoherence_time(P(0.01, 1.0, o=0.02975))
    bd = info.value.breakdown
    assert bd.window_open and bd.bracket_dimless <= 0 and math.isnan(bd.t_d)


def test_window_term_option():
    # weak plate: the open-window terms are large at this coupling scale
    p = P(0.5, 1.0, o=0.025, coupling=1e-5)
    with_s1 = decoherence_time(p)
    assert with_s1.window_open and with_s1.s1_plate != 0
    without = decoherence_time(p, window_term=False)
    c2 = p.plate_coupling ** 2
    assert with_s1.bracket_dimless - without.bracket_dimless == pytest.approx(
        -c2 * with_s1.s1_plate, rel=1e-9)


def test_velocity_sweep_table():
    t = decoherence_velocity_sweep(P(0.0, 1.0), [0.0, 0.5, 0.9])
    assert t.columns[0] == "v" and len(t) == 3
    td = t.column("t_d")
    assert td[0] > td[1] > td[2]
    assert t.metadata["argmin_v"] == 0.9


def test_resonance_sweep_decoupled_is_flat():
    t = resonance_sweep(P(0.01, 1.0, coupling=0.0), [0.01, 0.02, 0.04])
    assert len(set(t.column("t_d"))) == 1


def test_resonance_sweep_hierarchy_and_minimum():
    # 8 points, none exactly at O = w (see the resonant-budget test)
    grid = np.linspace(0.02, 0.04, 8)
    hot = resonance_sweep(P(0.01, 1.0), grid, jobs=2)
    cold = resonance_sweep(P(0.01, 10.0), grid, jobs=2)
    for a, b in zip(hot.column("t_d"), cold.column("t_d")):
        if a is not None and b is not None:
            assert a <= b
    assert abs(hot.metadata["argmin_o_tilde"] - 0.03) <= 0.02 / 7
    with pytest.raises(ValueError):
        resonance_sweep(P(0.01), [0.02, 0.01])


def test_exact_resonance_respects_total_budget():
    # at O = w the pole meets the slice ends on the window edge; the outer
    # integral must stop on the shared budget and say so
    tol = Tolerance(1e-10, 1e-8, 200_000)
    r = plate_term_s2(P(0.01, 10.0, o=0.03), tol)
    assert not r.converged
    assert "max_evaluations" in r.flags
    assert r.evaluations <= 200_000 + 20_000 * 21

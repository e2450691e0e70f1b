"""Rule-layer tests: pair/triplet rules, closed forms, fits, ratio laws."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsynapse.device import DeviceParams
from fgsynapse.errors import ConfigError, FitError
from fgsynapse.theory import (
    ClosedFormConstants,
    DstdpParams,
    TstdpParams,
    compression_factor,
    dstdp_accumulate,
    dstdp_dw,
    fg_doublet_injection,
    fg_doublet_tunneling,
    fit_exponential_window,
    ratio_yfg,
    ratio_ytheory,
    tstdp_accumulate,
    tstdp_dw,
)
from fgsynapse.waveforms import TripletAmplitudeParams, WaveformConfig

D = DstdpParams()
T = TstdpParams()
P = DeviceParams()
CFG = WaveformConfig()


def test_param_validation():
    with pytest.raises(ConfigError):
        DstdpParams(tau_plus=0.0)
    with pytest.raises(ConfigError):
        TstdpParams(a3_plus=-1e-3)
    with pytest.raises(ConfigError):
        TstdpParams(minimal_model="visual-cortex")  # needs a2_plus = 0
    with pytest.raises(ConfigError):
        TstdpParams(a3_minus=1e-3)  # hippocampal forbids the third- order LTD
    TstdpParams(a2_plus=0.0, minimal_model="visual-cortex")
    TstdpParams(a3_minus=1e-3, minimal_model="full")


def test_pair_rule_hand_values():
    assert dstdp_dw(10e-3, D) == pytest.approx(0.002536583782568018,
                                               rel=1e-12)
    assert dstdp_dw(-10e-3, D) == pytest.approx(-0.0022297208173554617,
                                                rel=1e-12)
    assert dstdp_dw(0.0, D) == D.a_plus  # dt = 0 takes the potentiation side


def test_triplet_event_terms():
    # post event: exp(-dt1/tau+) * (a2+ + a3+*exp(-dt2/tau_y))
    got = tstdp_dw(5e-3, 10e-3, np.inf, "post", T)
    want = math.exp(-5e-3 / 16.8e-3) * (
        4.6e-3 + 9.1e-3 * math.exp(-10e-3 / 48e-3))
    assert got == pytest.approx(want, rel=1e-12)
    # no previous post: the pair term alone survives
    alone = tstdp_dw(5e-3, np.inf, np.inf, "post", T)
    assert alone == pytest.approx(math.exp(-5e-3 / 16.8e-3) * 4.6e-3,
                                  rel=1e-12)
    # pre event: -exp(dt1/tau-) * a2- for the hippocampal set
    dep = tstdp_dw(-7e-3, np.inf, 20e-3, "pre", T)
    assert dep == pytest.approx(-math.exp(-7e-3 / 33.7e-3) * 3e-3, rel=1e-12)
    with pytest.raises(ConfigError):
        tstdp_dw(0.0, np.inf, np.inf, "spike", T)


def test_pair_accumulator_enumerates_nearest_interactions():
    # pre 0, post 10 ms, pre 30 ms: one potentiation pair, one depression
    pre, post = (0.0, 30e-3), (10e-3,)
    want = (D.a_plus * math.exp(-10e-3 / D.tau_plus)
            - D.a_minus * math.exp(-20e-3 / D.tau_minus))
    assert dstdp_accumulate(pre, post, D) == pytest.approx(want, rel=1e-12)


def test_simultaneous_spikes_pair_as_potentiation():
    # pre sorts before post on a tie, so the pair reads dt = 0
    assert dstdp_accumulate((1.0,), (1.0,), D) == pytest.approx(D.a_plus,
                                                               rel=1e-12)


def test_triplet_accumulator_post_pre_post_by_hand():
    # post 0, pre 5 ms, post 10 ms (the strongest anchor pattern)
    pre, post = (5e-3,), (0.0, 10e-3)
    dep = -T.a2_minus * math.exp(-5e-3 / T.tau_minus)
    pot = math.exp(-5e-3 / T.tau_plus) * (
        T.a2_plus + T.a3_plus * math.exp(-10e-3 / T.tau_y))
    assert tstdp_accumulate(pre, post, T) == pytest.approx(dep + pot,
                                                           rel=1e-12)


@given(st.lists(st.floats(min_value=0.0, max_value=0.4), min_size=1,
                max_size=6, unique=True),
       st.lists(st.floats(min_value=0.0, max_value=0.4), min_size=1,
                max_size=6, unique=True))
def test_triplet_rule_reduces_to_pair_rule_without_a3(pre, post):
    pre, post = sorted(pre), sorted(post)
    reduced = TstdpParams(a3_plus=0.0)
    ref = DstdpParams(a_plus=reduced.a2_plus, a_minus=reduced.a2_minus,
                      tau_plus=reduced.tau_plus, tau_minus=reduced.tau_minus)
    assert tstdp_accumulate(pre, post, reduced) == pytest.approx(
        dstdp_accumulate(pre, post, ref), abs=1e-15)


def test_closed_form_constants_pinned():
    # regression pins; cross-validated against the integrator elsewhere
    cf = ClosedFormConstants.from_params(P, CFG)
    assert cf.a == pytest.approx(-2.946255166786361e-13, rel=1e-9)
    assert cf.x == pytest.approx(80.0011683673389, rel=1e-9)
    assert cf.b == pytest.approx(4.096599260729916e-13, rel=1e-9)
    assert cf.b_prime == pytest.approx(-4.137161430761772e-15, rel=1e-9)
    assert cf.y == pytest.approx(-99.01956520888314, rel=1e-9)
    assert cf.v_fg_min == pytest.approx(4.470496446528837, rel=1e-12)


def test_closed_form_structure():
    cf = ClosedFormConstants.from_params(P, CFG)
    # the potentiation-side rate is the gate-ramp feedback rate
    assert 1.0 / cf.x == pytest.approx(12.5e-3, rel=1e-3)
    # gate floor couples through the capacitive divider
    want = P.v_fg_rest - (P.c_g / P.c_t) * (CFG.v_g_init - CFG.v_g_min)
    assert cf.v_fg_min == pytest.approx(want, rel=1e-12)
    # depression-side effective time constant is v_ox over the triangle slope
    assert P.v_ox / abs(CFG.s3) == pytest.approx(11e-3, rel=2e-3)


def test_doublet_predictions_pinned():
    cf = ClosedFormConstants.from_params(P, CFG)
    assert fg_doublet_injection(10e-3, cf, CFG.v_d_min, P) == pytest.approx(
        4.305281398820678e-05, rel=1e-9)
    assert fg_doublet_tunneling(-10e-3, cf, CFG, P) == pytest.approx(
        2.241753295012566e-05, rel=1e-9)


def test_doublet_predictions_decay_with_separation():
    cf = ClosedFormConstants.from_params(P, CFG)
    inj = [fg_doublet_injection(dt, cf, CFG.v_d_min, P)
           for dt in (5e-3, 10e-3, 20e-3, 50e-3)]
    tun = [fg_doublet_tunneling(-dt, cf, CFG, P)
           for dt in (5e-3, 10e-3, 20e-3, 50e-3)]
    assert all(a > b > 0 for a, b in zip(inj, inj[1:]))
    assert all(a > b > 0 for a, b in zip(tun, tun[1:]))


def test_ratio_laws_hand_values():
    assert ratio_yfg("single", 0.1, P) == pytest.approx(1.4918246976412703,
                                                        rel=1e-12)
    assert ratio_yfg("double", 0.1, P) == pytest.approx(2.4918246976412703,
                                                        rel=1e-12)
    with pytest.raises(ConfigError):
        ratio_yfg("triple", 0.1, P)
    assert ratio_ytheory(10e-3, T) == pytest.approx(
        1.0 + (9.1 / 4.6) * math.exp(-10e-3 / 48e-3), rel=1e-12)


def test_depth_laws_invert_the_theory_ratio():
    from fgsynapse.waveforms import delta_vd_double, delta_vd_single
    amp = TripletAmplitudeParams(r=2.0)
    rule = TstdpParams()
    for dt2 in np.linspace(1e-3, 16e-3, 7):
        boosted = ratio_yfg("single", delta_vd_single(dt2, amp), P)
        assert boosted == pytest.approx(ratio_ytheory(2.0 * dt2, rule),
                                        rel=1e-12)
        boosted = ratio_yfg("double", delta_vd_double(dt2, amp), P)
        assert boosted == pytest.approx(ratio_ytheory(2.0 * dt2, rule),
                                        rel=1e-12)


def test_compression_factor():
    assert compression_factor(25e-3, 12.5e-3) == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        compression_factor(25e-3, 0.0)


def test_exponential_fit_recovers_exact_data():
    dts = np.linspace(2e-3, 60e-3, 9)
    pts = [(dt, 0.3 * math.exp(-dt / 21e-3)) for dt in dts]
    fit = fit_exponential_window(pts)
    assert fit.amplitude == pytest.approx(0.3, rel=1e-9)
    assert fit.tau == pytest.approx(21e-3, rel=1e-9)
    assert fit.rms_log_residual < 1e-12
    assert fit.n_points == 9
    neg = [(-dt, -0.12 * math.exp(-dt / 33e-3)) for dt in dts]
    fit = fit_exponential_window(neg)
    assert fit.amplitude == pytest.approx(-0.12, rel=1e-9)
    assert fit.tau == pytest.approx(33e-3, rel=1e-9)


def test_exponential_fit_rejects_degenerate_inputs():
    with pytest.raises(FitError):
        fit_exponential_window([(5e-3, 0.1)])
    with pytest.raises(FitError):
        fit_exponential_window([(0.0, 0.1), (5e-3, 0.05)])
    with pytest.raises(FitError):
        fit_exponential_window([(-5e-3, 0.1), (5e-3, 0.05)])
    with pytest.raises(FitError):
        fit_exponential_window([(5e-3, 0.1), (10e-3, -0.05)])
    with pytest.raises(FitError):
        fit_exponential_window([(5e-3, 0.1), (10e-3, 0.2)])  # growing

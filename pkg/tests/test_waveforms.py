"""Waveform synthesis tests: trace shapes and pulse-depth laws."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fgsynapse.errors import ConfigError
from fgsynapse.waveforms import (
    DrainTrace,
    GateTrace,
    TripletAmplitudeParams,
    TunnelEffTrace,
    TunnelTriangle,
    WaveformConfig,
    delta_vd_double,
    delta_vd_single,
)

CFG = WaveformConfig()
AMP = TripletAmplitudeParams()


def test_slopes_match_hand_values():
    assert CFG.s2 == pytest.approx(8.0, rel=1e-12)
    assert CFG.s3 == pytest.approx(-11.1 / 0.299, rel=1e-12)


def test_config_validation():
    with pytest.raises(ConfigError):
        WaveformConfig(drain_mode="triple")
    with pytest.raises(ConfigError):
        WaveformConfig(v_g_min=3.4)
    with pytest.raises(ConfigError):
        WaveformConfig(t_d=20e-3)  # not small against the gate ramp
    with pytest.raises(ConfigError):
        WaveformConfig(t_tun=2e-3)  # shorter than rise + sampling window


def test_gate_trace_piecewise_shape():
    g = GateTrace([1.0], CFG)
    t = np.array([0.5, 1.0, 1.0 + 0.5e-6, 1.0 + 1e-6, 1.0 + 1e-6 + 0.05,
                  1.0 + 1e-6 + 0.1, 2.0])
    v = g(t)
    assert v[0] == 3.3                      # before the spike
    assert v[1] == 3.3                      # fall starts at the spike
    assert v[2] == pytest.approx(2.9)       # halfway down the fast edge
    assert v[3] == pytest.approx(2.5, abs=1e-8)   # floor reached
    assert v[4] == pytest.approx(2.5 + 8.0 * 0.05)   # recovery ramp
    assert v[5] == pytest.approx(3.3)       # ramp complete
    assert v[6] == 3.3
    assert g.falling_at(1.0 + 0.5e-6)
    assert not g.falling_at(1.0 + 2e-6)


def test_tunnel_triangle_shape():
    tri = TunnelTriangle([2.0], CFG)
    t = np.array([1.0, 2.0 + 0.5e-3, 2.0 + 1e-3, 2.0 + 0.15, 2.0 + 0.3, 3.0])
    v = tri(t)
    assert v[0] == 5.4
    assert v[1] == pytest.approx(5.4 + 11.1 * 0.5)   # halfway up the rise
    assert v[2] == pytest.approx(16.5)               # peak
    assert v[3] == pytest.approx(16.5 + CFG.s3 * (0.15 - 1e-3))
    assert v[4] == pytest.approx(5.4, abs=1e-8)      # decay finished
    assert v[5] == 5.4
    assert tri.rising_at(2.0 + 0.5e-3)
    assert not tri.rising_at(2.0 + 5e-3)


def test_tunnel_eff_samples_triangle_only_at_pre_spikes():
    pre, post = [0.045], [0.0]
    eff = TunnelEffTrace(pre, post, CFG)
    tri = TunnelTriangle(post, CFG)
    inside = 0.045 + 1e-3
    outside = 0.045 + 3e-3
    assert eff(np.array([inside]))[0] == tri(np.array([inside]))[0]
    assert tri(np.array([outside]))[0] > 5.4   # triangle still alive
    assert eff(np.array([outside]))[0] == 5.4  # but the window has closed
    assert eff.window_at(inside) and not eff.window_at(outside)


def test_single_pulse_depth_matches_hand_values():
    assert delta_vd_single(10e-3, AMP) == pytest.approx(
        0.23947540639098935, rel=1e-12)
    assert delta_vd_single(20e-3, AMP) == pytest.approx(
        0.20867795496559471, rel=1e-12)
    assert delta_vd_single(np.inf, AMP) == 0.0


def test_double_pulse_depth_matches_hand_values():
    assert delta_vd_double(10e-3, AMP) == pytest.approx(
        0.11847119417360544, rel=1e-12)
    assert delta_vd_double(20e-3, AMP) == pytest.approx(
        0.06638786084027211, rel=1e-12)


def test_double_pulse_vanishes_past_threshold():
    thr = AMP.tau_y * math.log(AMP.ratio)
    assert delta_vd_double(thr, AMP) == 0.0          # analytic zero survives
    assert math.isnan(delta_vd_double(thr + 1e-6, AMP))
    assert math.isnan(delta_vd_double(1.0, AMP))


def test_depth_laws_reject_nonpositive_gaps():
    with pytest.raises(ConfigError):
        delta_vd_single(0.0, AMP)
    with pytest.raises(ConfigError):
        delta_vd_double(-5e-3, AMP)


def test_compression_rescales_the_gap_axis():
    fast = TripletAmplitudeParams(r=2.0)
    for dt2 in (4e-3, 9e-3, 16e-3):
        assert delta_vd_single(dt2, fast) == pytest.approx(
            delta_vd_single(2.0 * dt2, AMP), rel=1e-12)


@given(st.floats(min_value=1e-4, max_value=32e-3))
def test_depth_laws_satisfy_the_boost_identity(dt2):
    # exp(dvs/v_inj) = 1 + exp(dvd/v_inj): both laws encode the same boost
    dvs = delta_vd_single(dt2, AMP)
    dvd = delta_vd_double(dt2, AMP)
    assert math.exp(dvs / AMP.v_inj) == pytest.approx(
        1.0 + math.exp(dvd / AMP.v_inj), rel=1e-12)


@given(st.floats(min_value=1e-4, max_value=0.5))
def test_single_depth_decays_with_gap(dt2):
    assert delta_vd_single(dt2, AMP) > delta_vd_single(dt2 * 1.5, AMP)


def test_drain_trace_flat_mode():
    cfg = WaveformConfig(drain_mode="flat")
    d = DrainTrace([1.0, 1.01], cfg)
    t = np.array([0.5, 1.0, 1.0 + 4e-4, 1.0 + 6e-4, 1.01 + 1e-4])
    assert list(d(t)) == [5.0, 0.3, 0.3, 5.0, 0.3]


def test_drain_trace_single_mode_levels():
    d = DrainTrace([1.0, 1.01], CFG, AMP)
    # first pulse of a run: no previous post, plain base depth
    assert d(np.array([1.0 + 1e-4]))[0] == pytest.approx(0.3)
    # second pulse deepens by the 10 ms law value
    assert d(np.array([1.01 + 1e-4]))[0] == pytest.approx(
        0.3 - 0.23947540639098935, rel=1e-12)


def test_drain_trace_double_mode_levels():
    cfg = WaveformConfig(drain_mode="double")
    d = DrainTrace([1.0, 1.01], cfg, AMP)
    # first post: base pulse then nothing (no previous post)
    assert d(np.array([1.0 + 1e-4]))[0] == pytest.approx(0.3)
    assert d(np.array([1.0 + 7e-4]))[0] == 5.0
    # second post: base pulse then the boosted second pulse
    assert d(np.array([1.01 + 1e-4]))[0] == pytest.approx(0.3)
    assert d(np.array([1.01 + 7e-4]))[0] == pytest.approx(
        0.3 - 0.11847119417360544, rel=1e-12)
    assert d.active_at(1.01 + 7e-4)
    assert not d.active_at(1.01 + 11e-4)


def test_drain_trace_guards():
    with pytest.raises(ConfigError):
        DrainTrace([1.0], CFG)            # pulsed mode needs amplitudes
    with pytest.raises(ConfigError):
        DrainTrace([1.0, 1.0008], CFG, AMP)  # pulses collide
    with pytest.raises(ConfigError):
        DrainTrace([1.0, 0.5], CFG, AMP)  # unsorted

"""Closed-form plasticity rules and analytic predictions for the FG device.

Two layers live here. The first is the pure spike-timing rules used as
references: the pair-based rule (one exponential per side of the window) and
the triplet rule, whose potentiation gets an extra term keyed to the gap
between the current and previous post spike. The second layer is the set of
analytic predictions for what the FG device does on isolated spike pairs,
obtained by integrating the injection/tunneling exponentials in closed form
under the piecewise-linear control waveforms. Those expressions are the
oracles the numerical engine is checked against, and the ratio laws derived
from them are what the drain-pulse depth laws invert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .device import DeviceParams, checked_exp
from .errors import ConfigError, FitError
from .waveforms import WaveformConfig

MINIMAL_MODELS = ("full", "visual-cortex", "hippocampal")


@dataclass(frozen=True)
class DstdpParams:
    """Pair rule: dw = a_plus*exp(-dt/tau_plus) for dt >= 0,
    -a_minus*exp(dt/tau_minus) for dt < 0, with dt = t_post - t_pre."""

    a_plus: float = 4.6e-3
    a_minus: float = 3e-3
    tau_plus: float = 16.8e-3    # s
    tau_minus: float = 33.7e-3   # s

    def __post_init__(self):
        for name in ("a_plus", "a_minus", "tau_plus", "tau_minus"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class TstdpParams:
    """Triplet rule amplitudes and time constants.

    minimal_model records which reduced parameterization this instance is
    meant to be: "visual-cortex" requires a2_plus = 0 and a3_minus = 0,
    "hippocampal" requires a3_minus = 0, "full" allows everything. The
    constructor enforces consistency rather than zeroing fields silently.
    """

    a2_plus: float = 4.6e-3
    a2_minus: float = 3e-3
    a3_plus: float = 9.1e-3
    a3_minus: float = 0.0
    tau_plus: float = 16.8e-3    # s
    tau_minus: float = 33.7e-3   # s
    tau_x: float = 101e-3        # s, only exercised when a3_minus > 0
    tau_y: float = 48e-3         # s
    minimal_model: str = "hippocampal"

    def __post_init__(self):
        if self.minimal_model not in MINIMAL_MODELS:
            raise ConfigError(f"minimal_model must be one of {MINIMAL_MODELS}")
        for name in ("tau_plus", "tau_minus", "tau_x", "tau_y"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        for name in ("a2_plus", "a2_minus", "a3_plus", "a3_minus"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.minimal_model == "visual-cortex" and (
                self.a2_plus != 0 or self.a3_minus != 0):
            raise ConfigError("visual-cortex minimal model needs a2_plus = 0 "
                              "and a3_minus = 0")
        if self.minimal_model == "hippocampal" and self.a3_minus != 0:
            raise ConfigError("hippocampal minimal model needs a3_minus = 0")


def dstdp_dw(dt, p: DstdpParams):
    """Pair-rule weight change for dt = t_post - t_pre (dt = 0 potentiates)."""
    dt = np.asarray(dt, dtype=float)
    pot = p.a_plus * np.exp(-np.maximum(dt, 0.0) / p.tau_plus)
    dep = -p.a_minus * np.exp(np.minimum(dt, 0.0) / p.tau_minus)
    out = np.where(dt >= 0, pot, dep)
    return float(out) if out.ndim == 0 else out


def tstdp_dw(dt1, dt2, dt3, event: str, p: TstdpParams):
    """Triplet-rule weight change contributed by one spike event.

    At a post spike: dt1 = t_post - t_prev_pre >= 0, dt2 = gap to the
    previous post spike (np.inf when there is none), and

        dw = exp(-dt1/tau_plus) * (a2_plus + a3_plus*exp(-dt2/tau_y)).

    At a pre spike: dt1 = t_prev_post - t_pre <= 0, dt3 = gap to the
    previous pre spike (np.inf when none), and

        dw = -exp(dt1/tau_minus) * (a2_minus + a3_minus*exp(-dt3/tau_x)).
    """
    if event == "post":
        return math.exp(-dt1 / p.tau_plus) * (
            p.a2_plus + p.a3_plus * math.exp(-dt2 / p.tau_y))
    if event == "pre":
        return -math.exp(dt1 / p.tau_minus) * (
            p.a2_minus + p.a3_minus * math.exp(-dt3 / p.tau_x))
    raise ConfigError("event must be 'pre' or 'post'")


def _merged_events(pre, post):
    """Spike times merged into one stream; pre sorts before post on a tie."""
    tagged = [(float(t), 0) for t in pre] + [(float(t), 1) for t in post]
    tagged.sort()
    return tagged


def dstdp_accumulate(pre, post, p: DstdpParams) -> float:
    """Total pair-rule dw over a schedule, nearest-spike interactions only."""
    total = 0.0
    last_pre = last_post = None
    for t, kind in _merged_events(pre, post):
        if kind == 1:
            if last_pre is not None:
                total += p.a_plus * math.exp(-(t - last_pre) / p.tau_plus)
            last_post = t
        else:
            if last_post is not None:
                total -= p.a_minus * math.exp(-(t - last_post) / p.tau_minus)
            last_pre = t
    return total


def tstdp_accumulate(pre, post, p: TstdpParams) -> float:
    """Total triplet-rule dw over a schedule, nearest-spike interactions."""
    total = 0.0
    last_pre = last_post = None
    for t, kind in _merged_events(pre, post):
        if kind == 1:
            if last_pre is not None:
                dt2 = np.inf if last_post is None else t - last_post
                total += tstdp_dw(t - last_pre, dt2, np.inf, "post", p)
            last_post = t
        else:
            if last_post is not None:
                dt3 = np.inf if last_pre is None else t - last_pre
                total += tstdp_dw(last_post - t, np.inf, dt3, "pre", p)
            last_pre = t
    return total


# --------------------------------------------------------------------------
# Analytic FG pair predictions


@dataclass(frozen=True)
class ClosedFormConstants:
    """Constants of the closed-form FG pair expressions.

    Never construct these by hand: from_params derives every field from the
    device and waveform parameters, so oracle comparisons cannot drift out of
    sync with the engine's inputs.

    a        V, injection prefactor (negative: injection lowers v_fg). The
             drop for a pair at separation dt is a*exp(-x*dt) times the
             drain-depth factor exp((v_dd - v_d)/v_inj).
    x        1/s, decay rate of injection with pair separation; set by the
             gate recovery feeding through to the FG node.
    b        A, tunneling prefactor at the extrapolated triangle peak.
    b_prime  b/y.
    y        1/s, rate at which the tunneling integrand moves during the
             sampling window (negative: triangle decays, gate recovers).
    v_fg_min FG voltage right after a gate drop, with the slow part at rest.
    """

    a: float
    x: float
    b: float
    b_prime: float
    y: float
    v_fg_min: float

    def __post_init__(self):
        if self.x <= 0:
            raise ConfigError("x must be strictly positive")

    @classmethod
    def from_params(cls, dev: DeviceParams, cfg: WaveformConfig):
        v_fg_min = dev.v_fg_rest - (dev.c_g / dev.c_t) * (cfg.v_g_init - cfg.v_g_min)
        x = dev.alpha * dev.kappa * (dev.c_g / dev.c_t) * cfg.s2 / dev.u_t
        a = (dev.i_inj0
             * float(checked_exp(dev.alpha * dev.kappa * (dev.v_dd - v_fg_min)
                                 / dev.u_t, "closed-form a"))
             * (math.exp(-x * cfg.t_d) - 1.0) / (dev.c_t * x))
        y = (cfg.s3 - (dev.c_g / dev.c_t) * cfg.s2) / dev.v_ox
        b = dev.i_tun0 * float(checked_exp(
            (cfg.v_tun_max - cfg.s3 * cfg.t_tun_delay - v_fg_min) / dev.v_ox,
            "closed-form b"))
        return cls(a=a, x=x, b=b, b_prime=b / y, y=y, v_fg_min=v_fg_min)


def fg_doublet_injection(dt, cf: ClosedFormConstants, v_d_min: float,
                         p: DeviceParams):
    """Magnitude of the slow FG drop for one pre-then-post pair.

    dt >= 0 is the post-minus-pre separation; the post spike's drain pulse
    reaches v_d_min. Valid while the pulse still lands on the gate recovery
    ramp (dt + t_d below t_fall_gate + t_g). Returned positive; the engine
    applies it as a decrease.
    """
    dt = np.asarray(dt, dtype=float)
    if np.any(dt < 0):
        raise ConfigError("pair separation dt must be >= 0 here")
    boost = math.exp((p.v_dd - v_d_min) / p.v_inj)
    out = abs(cf.a) * np.exp(-cf.x * dt) * boost
    return float(out) if out.ndim == 0 else out


def fg_doublet_tunneling(dt, cf: ClosedFormConstants, cfg: WaveformConfig,
                         p: DeviceParams):
    """Magnitude of the slow FG rise for one post-then-pre pair.

    dt < 0 is t_post - t_pre; the pre spike samples the tunnel triangle
    |dt| after the post spike. Valid while the sampling window sits on the
    triangle's decay segment (t_tun_delay <= |dt| and |dt| + t_tun_pulse
    <= t_tun). Returned positive; the engine applies it as an increase.
    """
    dt = np.asarray(dt, dtype=float)
    if np.any(dt >= 0):
        raise ConfigError("pair separation dt must be < 0 here")
    t_pre = -dt
    span = (np.exp(cf.y * (t_pre + cfg.t_tun_pulse)) - np.exp(cf.y * t_pre))
    ramp = np.exp(p.c_g * cfg.s2 * t_pre / (p.c_t * p.v_ox))
    out = (cf.b_prime / p.c_t) * span * ramp
    return float(out) if out.ndim == 0 else out


def ratio_yfg(mode: str, delta_vd, p):
    """Weight-change ratio of a boosted pair to a plain pair.

    mode "single": the whole pulse deepens by delta_vd, ratio
    exp(delta_vd/v_inj). mode "double": a second equal-width pulse at extra
    depth delta_vd joins the base pulse, ratio 1 + exp(delta_vd/v_inj).
    p is anything carrying v_inj (device or amplitude params).
    """
    delta_vd = np.asarray(delta_vd, dtype=float)
    if mode == "single":
        out = np.exp(delta_vd / p.v_inj)
    elif mode == "double":
        out = 1.0 + np.exp(delta_vd / p.v_inj)
    else:
        raise ConfigError("mode must be 'single' or 'double'")
    return float(out) if out.ndim == 0 else out


def ratio_ytheory(dt2, p: TstdpParams):
    """Triplet-rule potentiation ratio, 1 + (a3_plus/a2_plus)*exp(-dt2/tau_y)."""
    dt2 = np.asarray(dt2, dtype=float)
    if np.any(dt2 <= 0):
        raise ConfigError("dt2 must be strictly positive")
    if p.a2_plus == 0:
        raise ConfigError("ratio undefined for a2_plus = 0")
    out = 1.0 + (p.a3_plus / p.a2_plus) * np.exp(-dt2 / p.tau_y)
    return float(out) if out.ndim == 0 else out


def compression_factor(tau_plus_theory: float, tau_plus_fg: float) -> float:
    """Time compression between the rule's window and the device's window."""
    if tau_plus_theory <= 0 or tau_plus_fg <= 0:
        raise ConfigError("time constants must be strictly positive")
    return tau_plus_theory / tau_plus_fg


@dataclass(frozen=True)
class WindowFit:
    """Result of fitting dw = amplitude*exp(-|dt|/tau) to one window side."""

    amplitude: float
    tau: float
    rms_log_residual: float
    n_points: int


def fit_exponential_window(points) -> WindowFit:
    """Least-squares exponential fit to one side of a learning window.

    points is an iterable of (dt, dw) with every dt strictly on one side of
    zero and every dw sharing one sign. The fit is linear in the log domain
    (ln|dw| against |dt|), which is deterministic and well behaved on the
    near-noiseless data produced here. Needs at least two points; two points
    give the exact interpolating exponential.
    """
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 2:
        raise FitError("need at least two points to fit an exponential")
    dts = np.array([a for a, _ in pts])
    dws = np.array([b for _, b in pts])
    if np.any(dts == 0) or (np.any(dts > 0) and np.any(dts < 0)):
        raise FitError("window points must lie strictly on one side of dt = 0")
    if np.any(dws == 0) or (np.any(dws > 0) and np.any(dws < 0)):
        raise FitError("weight changes must share one sign for a log-domain fit")
    sign = 1.0 if dws[0] > 0 else -1.0
    x = np.abs(dts)
    ylog = np.log(np.abs(dws))
    slope, intercept = np.polyfit(x, ylog, 1)
    if slope >= 0:
        raise FitError("window does not decay with |dt|; no exponential fit")
    resid = ylog - (slope * x + intercept)
    return WindowFit(amplitude=sign * math.exp(intercept),
                     tau=-1.0 / slope,
                     rms_log_residual=float(np.sqrt(np.mean(resid ** 2))),
                     n_points=len(pts))

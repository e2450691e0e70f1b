"""Control-node waveform synthesis driven by pre/post spike times.

Three traces drive the device:

* gate: drops from v_g_init to v_g_min at each pre spike (finite fall time
  standing in for an instantaneous edge), then recovers linearly over t_g.
* effective tunnel voltage: a global triangle rises at each post spike and
  decays slowly; the tunnel terminal only sees it inside a short window after
  each pre spike, which localizes depression at pre-synaptic events.
* drain: an inverted pulse at each post spike whose depth can carry an extra
  term that depends on the gap to the previous post spike. That extra depth
  is what upgrades pair-based plasticity to the triplet rule.

Traces are piecewise linear, right-continuous, and evaluated with numpy on
arrays of sample times. A later spike always restarts its trace (retrigger).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DRAIN_MODES = ("flat", "single", "double")


@dataclass(frozen=True)
class WaveformConfig:
    """Voltage/timing parameters of the gate, tunnel, and drain waveforms.

    Defaults are the bench settings used for all measurements: the gate swing
    sets the recovery slope s2 = (v_g_init - v_g_min)/t_g = 8 V/s and the
    tunnel triangle decays at s3 = (v_tun_init - v_tun_max)/(t_tun - t_tun_delay)
    which is about -37.1 V/s.
    """

    v_g_init: float = 3.3        # V, gate rest level
    v_g_min: float = 2.5         # V, gate pulse floor
    t_g: float = 100e-3          # s, gate recovery duration
    t_fall_gate: float = 1e-6    # s, finite stand-in for an instantaneous drop
    v_tun_init: float = 5.4      # V, tunnel rest level
    v_tun_max: float = 16.5      # V, tunnel triangle peak
    t_tun: float = 300e-3        # s, tunnel triangle total duration
    t_tun_delay: float = 1e-3    # s, rise time to the peak
    t_tun_pulse: float = 2e-3    # s, sampling window after each pre spike
    v_d_init: float = 5.0        # V, drain rest level
    v_d_min: float = 0.3         # V, drain pulse base depth
    t_d: float = 500e-6          # s, drain pulse width
    drain_mode: str = "single"   # flat | single | double

    def __post_init__(self):
        if self.drain_mode not in DRAIN_MODES:
            raise ConfigError(f"drain_mode must be one of {DRAIN_MODES}")
        if not self.v_g_min < self.v_g_init:
            raise ConfigError("need v_g_min < v_g_init")
        if not self.v_d_min < self.v_d_init:
            raise ConfigError("need v_d_min < v_d_init")
        if not self.v_tun_init < self.v_tun_max:
            raise ConfigError("need v_tun_init < v_tun_max")
        for name in ("t_g", "t_fall_gate", "t_tun", "t_tun_delay",
                     "t_tun_pulse", "t_d"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.t_d > self.t_g / 10:
            raise ConfigError("t_d must be small against the gate ramp "
                              "(t_d <= t_g/10)")
        if self.t_fall_gate >= self.t_g:
            raise ConfigError("t_fall_gate must be well below t_g")
        if self.t_tun_delay + self.t_tun_pulse >= self.t_tun:
            raise ConfigError("tunnel triangle too short for its rise and the "
                              "sampling window")

    @property
    def s2(self) -> float:
        """Gate recovery slope, V/s (positive)."""
        return (self.v_g_init - self.v_g_min) / self.t_g

    @property
    def s3(self) -> float:
        """Tunnel triangle falling slope, V/s (negative)."""
        return (self.v_tun_init - self.v_tun_max) / (self.t_tun - self.t_tun_delay)


@dataclass(frozen=True)
class TripletAmplitudeParams:
    """Parameters of the drain pulse depth laws.

    The extra pulse depth encodes the triplet term: a post spike arriving
    dt2 after the previous one gets a deeper drain pulse,

        single mode: dv = v_inj * ln(1 + (a3_plus/a2_plus) * exp(-r*dt2/tau_y))
        double mode: dv = v_inj * ln((a3_plus/a2_plus) * exp(-r*dt2/tau_y))

    where r rescales the hardware gap onto the (uncompressed) rule axis.
    r = 1 evaluates the laws verbatim; protocol runs pass their compression
    factor so compressed schedules see the intended boosts.
    """

    a2_plus: float = 4.6e-3
    a3_plus: float = 9.1e-3
    tau_y: float = 48e-3         # s
    v_inj: float = 0.25          # V, must match the device injection constant
    r: float = 1.0               # time compression applied to dt2

    def __post_init__(self):
        if self.a2_plus <= 0:
            raise ConfigError("a2_plus must be strictly positive")
        if self.a3_plus < 0:
            raise ConfigError("a3_plus must be >= 0")
        if self.tau_y <= 0:
            raise ConfigError("tau_y must be strictly positive")
        if self.v_inj <= 0:
            raise ConfigError("v_inj must be strictly positive")
        if self.r < 1:
            raise ConfigError("compression factor r must be >= 1")

    @property
    def ratio(self) -> float:
        return self.a3_plus / self.a2_plus

    @property
    def delta_vd_max(self) -> float:
        """Single-mode depth cap as dt2 -> 0: v_inj*ln(1 + a3/a2)."""
        return self.v_inj * np.log1p(self.ratio)

    @property
    def delta_vd_max_double(self) -> float:
        """Double-mode cap as dt2 -> 0: v_inj*ln(a3/a2)."""
        if self.a3_plus == 0:
            raise ConfigError("double-mode cap undefined for a3_plus = 0")
        return self.v_inj * np.log(self.ratio)


def _check_dt2(dt2):
    dt2 = np.asarray(dt2, dtype=float)
    if np.any(dt2 <= 0):
        raise ConfigError("dt2 must be strictly positive")
    return dt2


def delta_vd_single(dt2, p: TripletAmplitudeParams):
    """Extra single-pulse drain depth for a post-spike gap dt2 (> 0, inf ok).

    Decays to zero as dt2 grows; at dt2 -> 0 saturates at p.delta_vd_max.
    """
    dt2 = _check_dt2(dt2)
    return p.v_inj * np.log1p(p.ratio * np.exp(-p.r * dt2 / p.tau_y))


def delta_vd_double(dt2, p: TripletAmplitudeParams):
    """Second-pulse extra depth in double mode, or NaN when the pulse is absent.

    The law v_inj*ln((a3/a2)*exp(-r*dt2/tau_y)) goes negative past
    dt2 = tau_y*ln(a3/a2)/r; a negative depth is meaningless, so the second
    pulse simply vanishes there. Exactly at the threshold the law gives 0
    (a second pulse at the base depth).
    """
    dt2 = _check_dt2(dt2)
    with np.errstate(divide="ignore"):
        log_arg = np.log(p.ratio) if p.ratio > 0 else -np.inf
    la = log_arg - p.r * dt2 / p.tau_y
    # 1 ulp of slack so the analytic vanishing point itself reads as 0, not NaN
    present = la > -1e-9
    val = np.where(present, p.v_inj * np.maximum(la, 0.0), np.nan)
    return float(val) if np.isscalar(dt2) or val.ndim == 0 else val


def _sorted_times(times, what):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise ConfigError(f"{what} spike times must be one-dimensional")
    if t.size and np.any(np.diff(t) <= 0):
        raise ConfigError(f"{what} spike times must be strictly increasing")
    return t


def _latest_elapsed(events, t):
    """Time since the most recent event at or before each t (inf if none)."""
    t = np.asarray(t, dtype=float)
    if events.size == 0:
        return np.full(t.shape, np.inf)
    idx = np.searchsorted(events, t, side="right") - 1
    e = t - events[np.maximum(idx, 0)]
    return np.where(idx >= 0, e, np.inf)


class GateTrace:
    """Gate voltage as a function of time for a fixed pre-spike train."""

    def __init__(self, pre_times, cfg: WaveformConfig):
        self.pre = _sorted_times(pre_times, "pre")
        self.cfg = cfg

    def __call__(self, t):
        cfg = self.cfg
        e = _latest_elapsed(self.pre, t)
        falling = e < cfg.t_fall_gate
        ramping = (e >= cfg.t_fall_gate) & (e < cfg.t_fall_gate + cfg.t_g)
        v = np.full(e.shape, cfg.v_g_init)
        v = np.where(falling,
                     cfg.v_g_init - (cfg.v_g_init - cfg.v_g_min)
                     * (e / cfg.t_fall_gate), v)
        v = np.where(ramping, cfg.v_g_min + cfg.s2 * (e - cfg.t_fall_gate), v)
        return v

    def falling_at(self, t: float) -> bool:
        e = float(_latest_elapsed(self.pre, np.asarray([t]))[0])
        return e < self.cfg.t_fall_gate


class TunnelTriangle:
    """Global tunnel-node triangle driven by post spikes (before sampling)."""

    def __init__(self, post_times, cfg: WaveformConfig):
        self.post = _sorted_times(post_times, "post")
        self.cfg = cfg

    def __call__(self, t):
        cfg = self.cfg
        e = _latest_elapsed(self.post, t)
        rising = e < cfg.t_tun_delay
        decaying = (e >= cfg.t_tun_delay) & (e < cfg.t_tun)
        v = np.full(e.shape, cfg.v_tun_init)
        v = np.where(rising,
                     cfg.v_tun_init + (cfg.v_tun_max - cfg.v_tun_init)
                     * (e / cfg.t_tun_delay), v)
        v = np.where(decaying, cfg.v_tun_max + cfg.s3 * (e - cfg.t_tun_delay), v)
        return v

    def rising_at(self, t: float) -> bool:
        e = float(_latest_elapsed(self.post, np.asarray([t]))[0])
        return e < self.cfg.t_tun_delay


class TunnelEffTrace:
    """Effective tunnel voltage: the global triangle sampled at pre spikes.

    Equals the triangle only inside [t_pre, t_pre + t_tun_pulse) for each pre
    spike and v_tun_init everywhere else, so tunneling can only act right at
    pre-synaptic events.
    """

    def __init__(self, pre_times, post_times, cfg: WaveformConfig):
        self.pre = _sorted_times(pre_times, "pre")
        self.triangle = TunnelTriangle(post_times, cfg)
        self.cfg = cfg

    def __call__(self, t):
        e_pre = _latest_elapsed(self.pre, t)
        inside = e_pre < self.cfg.t_tun_pulse
        return np.where(inside, self.triangle(t), self.cfg.v_tun_init)

    def window_at(self, t: float) -> bool:
        e = float(_latest_elapsed(self.pre, np.asarray([t]))[0])
        return e < self.cfg.t_tun_pulse


class DrainTrace:
    """Drain voltage pulses at post spikes, depth set by the drain mode.

    flat:   every pulse goes to v_d_min for t_d.
    single: pulse depth v_d_min - delta_vd_single(dt2) where dt2 is the gap
            to the previous post spike (first spike of a run: plain v_d_min).
    double: base pulse v_d_min for t_d, then a second back-to-back pulse at
            v_d_min - delta_vd_double(dt2) when that law is alive.
    """

    def __init__(self, post_times, cfg: WaveformConfig,
                 amp: TripletAmplitudeParams | None = None):
        self.post = _sorted_times(post_times, "post")
        self.cfg = cfg
        if cfg.drain_mode != "flat" and amp is None:
            raise ConfigError("pulsed drain modes need TripletAmplitudeParams")
        self.amp = amp
        if self.post.size >= 2:
            gap = float(np.min(np.diff(self.post)))
            if gap < 2 * cfg.t_d:
                raise ConfigError(
                    f"post-spike gap {gap:.6g}s collides with drain pulses "
                    f"(need >= 2*t_d = {2 * cfg.t_d:.6g}s)")
        n = self.post.size
        dt2 = np.concatenate(([np.inf], np.diff(self.post))) if n else np.empty(0)
        if cfg.drain_mode == "single":
            self.level1 = cfg.v_d_min - delta_vd_single(dt2, amp)
        else:
            self.level1 = np.full(n, cfg.v_d_min)
        if cfg.drain_mode == "double" and n:
            extra = np.atleast_1d(delta_vd_double(dt2, amp))
            self.second_on = ~np.isnan(extra)
            self.level2 = np.where(self.second_on, cfg.v_d_min - extra, cfg.v_d_init)
        else:
            self.second_on = np.zeros(n, dtype=bool)
            self.level2 = np.full(n, cfg.v_d_init)

    def __call__(self, t):
        cfg = self.cfg
        t = np.asarray(t, dtype=float)
        v = np.full(t.shape, cfg.v_d_init)
        if self.post.size == 0:
            return v
        idx = np.searchsorted(self.post, t, side="right") - 1
        safe = np.maximum(idx, 0)
        e = t - self.post[safe]
        first = (idx >= 0) & (e >= 0) & (e < cfg.t_d)
        v = np.where(first, self.level1[safe], v)
        if self.cfg.drain_mode == "double":
            second = (idx >= 0) & (e >= cfg.t_d) & (e < 2 * cfg.t_d) \
                & self.second_on[safe]
            v = np.where(second, self.level2[safe], v)
        return v

    def active_at(self, t: float) -> bool:
        """True while any pulse of the latest post spike could be driving."""
        e = float(_latest_elapsed(self.post, np.asarray([t]))[0])
        span = 2 * self.cfg.t_d if self.cfg.drain_mode == "double" else self.cfg.t_d
        return e < span

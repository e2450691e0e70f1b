"""Behavioral models of the two drain-pulse depth generators.

The depth laws ask for a voltage that decays with the gap since the last
post spike. Two circuits realize that on chip:

* switched-capacitor generator (single-pulse law): a node capacitor C is
  reset to v_d_min - delta_vd_max at each post spike and then relaxes back
  toward v_d_min through a switched capacitor c_sc clocked at t_sc. Each
  clock tick shares charge, multiplying the remaining deficit by
  c/(c + c_sc), so the node climbs in a staircase whose envelope is an
  exponential with tau = (c/c_sc)*t_sc. The ideal single-pulse law is a
  log-of-exponential, not an exponential, so this generator is a deliberate
  approximation and its error against the law is reported, not hidden.

* current-source ramp generator (double-pulse law): the same reset followed
  by a constant current i_p pulling the node up linearly. The ideal
  double-pulse law is exactly linear in the gap, so this one matches to
  numerical precision until the ramp hits v_d_min and the second pulse
  disappears.

Both models are pure trace evaluators; the engine does not depend on them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .waveforms import TripletAmplitudeParams, delta_vd_double, delta_vd_single

# fixed non-overlap delay between a post spike's clock and the reset switch
RESET_DELAY = 10e-6

# switched-cap clock period ceiling set by the wanted gap resolution
T_SC_MAX = 2e-3


@dataclass(frozen=True)
class ScGeneratorParams:
    """Switched-capacitor generator sizing.

    The staircase time constant is (c/c_sc)*t_sc; construct via from_targets
    to size c_sc for a wanted tau_y. t_sc defaults to 1 ms: the resolution
    bound allows 2 ms, but the coarser clock pushes the envelope's error
    against a continuous exponential just past 2 % at one tau, so the
    default stays a factor of two below the ceiling.
    """

    c: float = 1e-12             # F, node capacitor
    c_sc: float = 2.0833333333333334e-14  # F, switched capacitor
    t_sc: float = 1e-3           # s, switched-cap clock period
    v_d_min: float = 0.3         # V, relaxation target (drain pulse base)
    delta_vd_max: float = 0.2728348823347575  # V, reset deficit below v_d_min
    v_d_init: float = 5.0        # V, node level before any post spike

    def __post_init__(self):
        for name in ("c", "c_sc", "t_sc", "delta_vd_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.t_sc > T_SC_MAX:
            raise ConfigError(f"t_sc above the {T_SC_MAX:g}s resolution bound")
        if self.delta_vd_max > self.v_d_min:
            raise ConfigError("reset would drive the node below ground")

    @property
    def tau_y(self) -> float:
        """Envelope time constant (c/c_sc)*t_sc realized by the staircase."""
        return (self.c / self.c_sc) * self.t_sc

    @classmethod
    def from_targets(cls, amp: TripletAmplitudeParams | None = None,
                     c: float = 1e-12, t_sc: float = 1e-3,
                     v_d_min: float = 0.3, v_d_init: float = 5.0):
        """Size c_sc for amp.tau_y and take the reset depth from the law."""
        amp = TripletAmplitudeParams() if amp is None else amp
        return cls(c=c, c_sc=c * t_sc / amp.tau_y, t_sc=t_sc,
                   v_d_min=v_d_min, delta_vd_max=amp.delta_vd_max,
                   v_d_init=v_d_init)


@dataclass(frozen=True)
class RampGeneratorParams:
    """Current-source ramp generator sizing.

    i_p is signed; the node recovers upward, so the deficit shrinks at
    |i_p|/c volts per second. from_targets picks i_p = -c*v_inj/tau_y so the
    ramp slope equals the ideal law's slope.
    """

    c: float = 1e-12
    i_p: float = -5.208333333333333e-12   # A
    v_d_min: float = 0.3
    delta_vd_max: float = 0.17055452750693878  # V, double-law cap
    v_d_init: float = 5.0

    def __post_init__(self):
        if self.c <= 0 or self.delta_vd_max <= 0:
            raise ConfigError("c and delta_vd_max must be strictly positive")
        if self.i_p >= 0:
            raise ConfigError("i_p must be negative (deficit decays)")
        if self.delta_vd_max > self.v_d_min:
            raise ConfigError("reset would drive the node below ground")

    @property
    def slope(self) -> float:
        """Deficit decay rate |i_p|/c in V/s."""
        return -self.i_p / self.c

    @classmethod
    def from_targets(cls, amp: TripletAmplitudeParams | None = None,
                     c: float = 1e-12, v_d_min: float = 0.3,
                     v_d_init: float = 5.0):
        amp = TripletAmplitudeParams() if amp is None else amp
        return cls(c=c, i_p=-c * amp.v_inj / amp.tau_y, v_d_min=v_d_min,
                   delta_vd_max=amp.delta_vd_max_double, v_d_init=v_d_init)


def _post_times(post_spikes):
    times = getattr(post_spikes, "post", post_spikes)
    t = np.asarray(times, dtype=float)
    if t.size and np.any(np.diff(t) <= 0):
        raise ConfigError("post spike times must be strictly increasing")
    return t


def sc_capacitor_trace(post_spikes, g: ScGeneratorParams, t):
    """Switched-cap node voltage at times t for a post-spike train.

    Before the first reset the node idles at v_d_init. Each post spike
    resets the node (after the fixed clock non-overlap delay) to
    v_d_min - delta_vd_max; every t_sc thereafter a charge-sharing step
    multiplies the remaining deficit by c/(c + c_sc).
    """
    post = _post_times(post_spikes)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    v = np.full(t.shape, g.v_d_init)
    if post.size:
        resets = post + RESET_DELAY
        idx = np.searchsorted(resets, t, side="right") - 1
        has = idx >= 0
        e = t - resets[np.maximum(idx, 0)]
        steps = np.floor_divide(e, g.t_sc)
        factor = g.c / (g.c + g.c_sc)
        deficit = g.delta_vd_max * factor ** steps
        v = np.where(has, g.v_d_min - deficit, v)
    return float(v[0]) if scalar else v


def emulated_delta_vd_single(dt2, g: ScGeneratorParams):
    """Realized single-pulse depth increment a gap dt2 after a reset."""
    dt2 = np.asarray(dt2, dtype=float)
    if np.any(dt2 <= 0):
        raise ConfigError("dt2 must be strictly positive")
    sample = sc_capacitor_trace((0.0,), g, RESET_DELAY + dt2)
    return g.v_d_min - sample


def emulated_delta_vd_double(dt2, g: RampGeneratorParams):
    """Realized double-pulse depth: linear ramp, NaN once it hits zero."""
    dt2 = np.asarray(dt2, dtype=float)
    if np.any(dt2 <= 0):
        raise ConfigError("dt2 must be strictly positive")
    depth = g.delta_vd_max - g.slope * dt2
    out = np.where(depth > 0, depth, np.nan)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GeneratorComparison:
    """Ideal-vs-emulated depth curves over a gap grid, plus the sup error.

    error is emulated - ideal where both are defined. sup_error ignores
    points where either side is absent (double mode past its clamp).
    """

    kind: str
    dt2: np.ndarray
    ideal: np.ndarray
    emulated: np.ndarray
    error: np.ndarray
    sup_error: float


def compare_generator(kind: str, gen, amp: TripletAmplitudeParams | None = None,
                      dt2=None) -> GeneratorComparison:
    """Evaluate one generator against its ideal law on a dt2 grid.

    The laws are compared on the uncompressed axis (amp.r forced to 1):
    the generators realize the law in the time base they physically run in.
    """
    amp = TripletAmplitudeParams() if amp is None else amp
    if amp.r != 1.0:
        amp = replace(amp, r=1.0)
    if dt2 is None:
        dt2 = np.linspace(2e-3, 100e-3, 197)
    dt2 = np.asarray(dt2, dtype=float)
    if kind == "single":
        ideal = delta_vd_single(dt2, amp)
        emulated = emulated_delta_vd_single(dt2, gen)
    elif kind == "double":
        ideal = np.atleast_1d(delta_vd_double(dt2, amp))
        emulated = np.atleast_1d(emulated_delta_vd_double(dt2, gen))
    else:
        raise ConfigError("kind must be single or double")
    error = emulated - ideal
    both = ~(np.isnan(ideal) | np.isnan(emulated))
    sup = float(np.max(np.abs(error[both]))) if np.any(both) else 0.0
    return GeneratorComparison(kind=kind, dt2=dt2, ideal=ideal,
                               emulated=emulated, error=error, sup_error=sup)

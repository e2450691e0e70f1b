"""Floating-gate pFET physics: static currents, capacitive coupling, weight map.

All quantities are SI unless a name says otherwise. The transistor sits with
its source at v_dd and operates subthreshold, so the channel current depends
exponentially on the floating-gate voltage. Two charge-transfer mechanisms
move the slow component of that voltage: hot-electron injection removes
positive charge (lowers v_fg, strengthens the weight) and oxide tunneling
adds it back (raises v_fg, weakens the weight). Everything here is a pure
function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ModelRangeError

# Exponent ceiling for every exp() in the model. A value this large means the
# configuration is broken, so fail loudly instead of saturating.
EXP_CAP = 200.0


def checked_exp(x, context=""):
    """np.exp with an overflow guard.

    Raises ModelRangeError when any exponent exceeds EXP_CAP; silent
    saturation would hide configuration mistakes.
    """
    x = np.asarray(x, dtype=float)
    if x.size and float(np.max(x)) > EXP_CAP:
        where = f" in {context}" if context else ""
        raise ModelRangeError(
            f"exponent {float(np.max(x)):.4g} exceeds cap {EXP_CAP:g}{where}")
    return np.exp(x)


@dataclass(frozen=True)
class DeviceParams:
    """Physical constants of the FG transistor and its programming processes.

    i_inj0, i_tun0 and v_ox are not directly measurable process prefactors;
    the defaults below were produced by protocols.calibrate_window against the
    measured pairing window (amplitudes 0.26 / -0.15 percent per pairing,
    time constants 25 / 22 ms on the uncompressed axis). c_t is pinned by the
    positive-side time constant, which is set by gate-ramp feedthrough rather
    than by any tunable current.
    """

    i_s0: float = 1e-15          # A, subthreshold preexponential
    kappa: float = 0.7           # gate coupling coefficient of the MOS surface
    u_t: float = 0.02585         # V, thermal voltage at room temperature
    i_inj0: float = 1.6307836508409535e-28   # A, injection prefactor (calibrated)
    v_inj: float = 0.25          # V, injection process voltage
    i_tun0: float = 5.944413222016862e-26    # A, tunneling prefactor (calibrated)
    v_ox: float = 0.4081898488328609         # V, tunneling process voltage (calibrated)
    c_t: float = 1.3353422e-11   # F, total capacitance at the FG node
    c_g: float = 5.5e-12         # F, gate-to-FG coupling capacitance
    c_tun: float = 2e-15         # F, tunnel-junction coupling capacitance
    v_dd: float = 5.2            # V, source rail
    v_fg_rest: float = 4.8       # V, quiescent slow FG voltage (stored charge)

    def __post_init__(self):
        if self.i_s0 <= 0:
            raise ConfigError("i_s0 must be strictly positive")
        # i_inj0 / i_tun0 may be zero: that disables the mechanism, which the
        # zero-current control run relies on. Negative is always wrong.
        if self.i_inj0 < 0 or self.i_tun0 < 0:
            raise ConfigError("injection/tunneling prefactors must be >= 0")
        if not 0 < self.kappa <= 1:
            raise ConfigError("kappa must lie in (0, 1]")
        for name in ("u_t", "v_inj", "v_ox", "c_t", "c_g"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be strictly positive")
        if self.c_tun < 0:
            raise ConfigError("c_tun must be >= 0")
        # The coupling model assumes the gate dominates the tunnel junction.
        if self.c_g < 10 * self.c_tun:
            raise ConfigError("need c_g >= 10*c_tun for gate-dominated coupling")
        if self.c_t < self.c_g + self.c_tun:
            raise ConfigError("c_t is the total node capacitance and cannot be "
                              "smaller than c_g + c_tun")

    @property
    def alpha(self) -> float:
        """Injection current exponent, 1 - u_t/v_inj."""
        return 1.0 - self.u_t / self.v_inj

    @property
    def beta(self) -> float:
        """Feedback gain alpha*kappa/u_t (1/V): d ln(I_inj)/d(-v_fg)."""
        return self.alpha * self.kappa / self.u_t


@dataclass(frozen=True)
class FgState:
    """Slow-timescale FG voltage component plus the current simulation time.

    v_fg_slow only moves through injection (down) or tunneling (up); the fast
    capacitive part of v_fg is reconstructed from the control traces.
    """

    v_fg_slow: float
    t: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.v_fg_slow):
            raise ConfigError("v_fg_slow must be finite")


def fg_voltage(state, v_g, v_tun, cfg, p: DeviceParams):
    """Total FG voltage given the instantaneous gate and tunnel node voltages.

    Control-node excursions from their rest values couple onto the FG node
    through the capacitive divider:

        v_fg = v_fg_slow + (c_g/c_t)*(v_g - v_g_init)
                         + (c_tun/c_t)*(v_tun - v_tun_init)

    `state` may be an FgState or a bare slow-voltage float/array; cfg supplies
    the rest values v_g_init and v_tun_init.
    """
    v_bar = state.v_fg_slow if isinstance(state, FgState) else state
    return (v_bar
            + (p.c_g / p.c_t) * (np.asarray(v_g, dtype=float) - cfg.v_g_init)
            + (p.c_tun / p.c_t) * (np.asarray(v_tun, dtype=float) - cfg.v_tun_init))


def drain_current(v_fg, p: DeviceParams):
    """Subthreshold saturated pFET channel current, i_s0*exp(kappa*(v_dd-v_fg)/u_t)."""
    return p.i_s0 * checked_exp(p.kappa * (p.v_dd - np.asarray(v_fg, dtype=float)) / p.u_t,
                                "drain_current")


def injection_current(i_d, delta_v_ds, p: DeviceParams):
    """Hot-electron injection gate current.

        i_inj = i_inj0 * (i_d/i_s0)**alpha * exp(-delta_v_ds/v_inj)

    delta_v_ds is stored drain-minus-source, i.e. v_d - v_dd, which is <= 0
    whenever the drain is pulled low; a deeper drain pulse therefore gives
    exponentially more injection. Zero channel current gives zero injection.
    """
    i_d = np.asarray(i_d, dtype=float)
    factor = checked_exp(-np.asarray(delta_v_ds, dtype=float) / p.v_inj,
                         "injection_current")
    return p.i_inj0 * (i_d / p.i_s0) ** p.alpha * factor


def tunneling_current(v_tun, v_fg, p: DeviceParams):
    """Oxide tunneling current, i_tun0*exp((v_tun - v_fg)/v_ox)."""
    expo = (np.asarray(v_tun, dtype=float) - np.asarray(v_fg, dtype=float)) / p.v_ox
    return p.i_tun0 * checked_exp(expo, "tunneling_current")


def weight_of(v_fg, p: DeviceParams):
    """Synaptic weight map, w = exp(-kappa*v_fg/u_t).

    Only ratios of weights are meaningful; see weight_change_percent.
    """
    return checked_exp(-p.kappa * np.asarray(v_fg, dtype=float) / p.u_t, "weight_of")


def weight_change_percent(dv_fg_slow, p: DeviceParams):
    """Percent weight change for a slow FG voltage shift.

    100*(w_after/w_before - 1) = 100*(exp(-kappa*dv/u_t) - 1); negative dv
    (injection) potentiates.
    """
    x = -p.kappa * np.asarray(dv_fg_slow, dtype=float) / p.u_t
    checked_exp(x, "weight_change_percent")  # range guard only
    return 100.0 * np.expm1(x)


def fg_shift_for_weight_change(dw_percent, p: DeviceParams):
    """Inverse of weight_change_percent: the dv_fg_slow giving dw_percent."""
    return -p.u_t / p.kappa * np.log1p(np.asarray(dw_percent, dtype=float) / 100.0)

"""Canonical parameter sets and protocol grids for the stock experiments.

Everything here is plain data: amplitude presets for the two biological
data sets the drain-pulse laws were tuned against, waveform presets, the
learning-window calibration target, and the protocol grids the CLI runs
by default. Timing values are on the rule axis (seconds); run_protocol
compresses them onto the hardware axis through ProtocolSpec.compression_r.
"""

from __future__ import annotations

from dataclasses import replace

from .protocols import ProtocolSpec, default_tstdp_for, window_points
from .theory import DstdpParams, TstdpParams
from .waveforms import TripletAmplitudeParams, WaveformConfig

# rule-axis learning-window target: (A+ %, A- %, tau+ s, tau- s) per pairing
WINDOW_TARGETS = (0.26, -0.15, 25e-3, 22e-3)

# rule-axis timing grids (seconds)
TRIPLET1_POINTS = ((5e-3, 5e-3), (10e-3, 10e-3), (5e-3, 15e-3), (15e-3, 5e-3))
TRIPLET2_POINTS = ((-5e-3, 5e-3), (-10e-3, 10e-3), (-5e-3, 15e-3),
                   (-15e-3, 5e-3))
QUADRUPLET_T = tuple(20e-3 * k for k in range(-8, 9) if k != 0)
QUADRUPLET_PAIR_DT = 5e-3
FREQUENCY_RHOS = (1.0, 5.0, 10.0, 20.0, 30.0, 40.0, 50.0)
FREQUENCY_PAIR_DT = 10e-3

DRAIN_MODES = ("flat", "single", "double")


def hippocampal_amplitudes() -> TripletAmplitudeParams:
    """Pulse-depth law constants fit to the hippocampal-culture rule."""
    return TripletAmplitudeParams()


def frequency_amplitudes() -> TripletAmplitudeParams:
    """Pulse-depth law constants used for the pairing-frequency runs.

    The third-order gain is raised to 28.7e-3 (about three times the
    hippocampal value) so potentiation keeps growing with frequency.
    """
    return TripletAmplitudeParams(a3_plus=28.7e-3)


def reference_dstdp() -> DstdpParams:
    """Doublet rule the pair term of the triplet presets reduces to."""
    return DstdpParams()


def hippocampal_tstdp() -> TstdpParams:
    return default_tstdp_for(hippocampal_amplitudes())


def frequency_tstdp() -> TstdpParams:
    return default_tstdp_for(frequency_amplitudes())


def default_waveform(mode: str = "flat") -> WaveformConfig:
    """Stock waveform for window, triplet, and quadruplet runs."""
    if mode not in DRAIN_MODES:
        raise ValueError(f"mode must be one of {DRAIN_MODES}")
    return WaveformConfig(drain_mode=mode)


def frequency_waveform(mode: str = "flat") -> WaveformConfig:
    """Waveform for pairing-frequency runs: drain base lifted to 0.5 V.

    The lift keeps the deeper 28.7e-3 pulse depths above ground.
    """
    return replace(default_waveform(mode), v_d_min=0.5)


def window_spec(side: str = "both", n: int = 25,
                r: float = 2.0) -> ProtocolSpec:
    """Single-pairing learning-window sweep over +-[2, 100] ms."""
    return ProtocolSpec(kind="window", points=window_points(side=side, n=n),
                        reps=1, compression_r=r)


def triplet1_spec(r: float = 2.0) -> ProtocolSpec:
    """Pre-post-pre triplets, 60 repetitions at 1 s."""
    return ProtocolSpec(kind="triplet1", points=TRIPLET1_POINTS,
                        compression_r=r)


def triplet2_spec(r: float = 2.0) -> ProtocolSpec:
    """Post-pre-post triplets, 60 repetitions at 1 s."""
    return ProtocolSpec(kind="triplet2", points=TRIPLET2_POINTS,
                        compression_r=r)


def quadruplet_spec(r: float = 2.0) -> ProtocolSpec:
    """Pair-gap-pair quadruplets over signed T, 60 repetitions at 1 s."""
    return ProtocolSpec(kind="quadruplet", points=QUADRUPLET_T,
                        pair_dt=QUADRUPLET_PAIR_DT, compression_r=r)


def frequency_spec(sign: int = 1, r: float = 2.0) -> ProtocolSpec:
    """60 pre-post pairs at each pairing rate, signed intra-pair gap."""
    if sign not in (-1, 1):
        raise ValueError("sign must be -1 or 1")
    return ProtocolSpec(kind="frequency", points=FREQUENCY_RHOS,
                        pair_dt=sign * FREQUENCY_PAIR_DT, compression_r=r)


def trace_spec(dt: float = 10e-3, r: float = 2.0) -> ProtocolSpec:
    """One pre-post pair, for node-trace inspection."""
    return ProtocolSpec(kind="window", points=(dt,), reps=1, compression_r=r)

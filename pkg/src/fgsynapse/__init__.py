"""Floating-gate synapse model implementing the triplet plasticity rule.

The package simulates a single floating-gate transistor synapse driven by
pre/post spike waveforms: hot-electron injection at post-synaptic drain
pulses potentiates, Fowler-Nordheim tunneling at pre-synaptic events
depresses, and the drain pulse depth encodes the triplet term of the
rule. Layers, bottom up: device physics, waveform synthesis, closed-form
theory, the transient integrator, protocol sweeps with calibration, the
behavioral pulse-depth generators, and a CSV/plot CLI.
"""

from .circuits import (
    GeneratorComparison,
    RampGeneratorParams,
    ScGeneratorParams,
    compare_generator,
    emulated_delta_vd_double,
    emulated_delta_vd_single,
    sc_capacitor_trace,
)
from .config import RunConfig, load_config
from .defaults import (
    WINDOW_TARGETS,
    default_waveform,
    frequency_amplitudes,
    frequency_spec,
    frequency_waveform,
    hippocampal_amplitudes,
    hippocampal_tstdp,
    quadruplet_spec,
    reference_dstdp,
    triplet1_spec,
    triplet2_spec,
    window_spec,
)
from .device import DeviceParams, FgState
from .engine import (
    RunResult,
    SpikeSchedule,
    TraceBundle,
    integrate,
    schedule_for,
    weight_change_percent,
)
from .errors import (
    CalibrationError,
    ConfigError,
    FgModelError,
    FitError,
    ModelRangeError,
)
from .protocols import (
    CalibrationReport,
    ProtocolRow,
    ProtocolSpec,
    build_schedule,
    calibrate_window,
    default_tstdp_for,
    fit_window_sides,
    run_protocol,
    window_points,
    window_sweep,
)
from .theory import (
    ClosedFormConstants,
    DstdpParams,
    TstdpParams,
    WindowFit,
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
from .waveforms import (
    DrainTrace,
    GateTrace,
    TripletAmplitudeParams,
    TunnelEffTrace,
    TunnelTriangle,
    WaveformConfig,
    delta_vd_double,
    delta_vd_single,
)

__version__ = "0.1.0"

"""Command-line front end.

Each subcommand runs one stock experiment with the packaged defaults,
optionally merged with an INI config (see config.py), and writes CSV
files plus optional SVG plots into the output directory. All outputs are
deterministic: rerunning a command with the same inputs reproduces the
CSV bytes exactly.

Exit codes: 0 ok, 1 validation or usage, 2 model or fit failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import defaults
from .circuits import RampGeneratorParams, ScGeneratorParams, compare_generator
from .config import RunConfig, load_config
from .device import DeviceParams
from .engine import integrate
from .errors import CalibrationError, ConfigError, FitError, ModelRangeError
from .protocols import build_schedule, calibrate_window, run_protocol
from .theory import fit_exponential_window

ROW_HEADER = ("protocol", "point_label", "dt1_ms", "dt2_ms", "dt3_ms",
              "T_ms", "rho_hz", "dw_fg_pct", "dw_dstdp_pct", "dw_tstdp_pct")
FIT_HEADER = ("side", "amplitude_pct", "tau_ms", "rms_log_residual",
              "n_points")
TRACE_HEADER = ("t_s", "v_g_v", "v_tun_eff_v", "v_d_v", "v_fg_v",
                "i_d_a", "i_inj_a", "i_tun_a")
CIRCUIT_HEADER = ("dt2_ms", "ideal_v", "emulated_v", "error_v")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        text = repr(float(value))   # collapses numpy scalars to plain floats
    else:
        text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def _write_csv(path: str, header, rows):
    # hand-rolled writer: repr floats, unix newlines, byte-stable output
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    print(f"wrote {path}")


def _write_rows(path: str, rows):
    _write_csv(path, ROW_HEADER,
               [(r.protocol, r.point_label, r.dt1_ms, r.dt2_ms, r.dt3_ms,
                 r.t_ms, r.rho_hz, r.dw_fg_pct, r.dw_dstdp_pct,
                 r.dw_tstdp_pct) for r in rows])


def _base_config(cmd: str, mode: str) -> RunConfig:
    if cmd == "frequency":
        waveform = defaults.frequency_waveform(mode)
        amplitudes = defaults.frequency_amplitudes()
    else:
        waveform = defaults.default_waveform(mode)
        amplitudes = defaults.hippocampal_amplitudes()
    protocol = None
    if cmd == "window":
        protocol = defaults.window_spec()
    elif cmd == "quadruplet":
        protocol = defaults.quadruplet_spec()
    elif cmd == "waveform":
        protocol = defaults.trace_spec()
    return RunConfig(device=DeviceParams(), waveform=waveform,
                     amplitudes=amplitudes, protocol=protocol)


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    # explicit flags win over config file values; store_true flags only add
    return replace(
        cfg,
        out=args.out if args.out else cfg.out,
        plot=cfg.plot or args.plot,
        trace=cfg.trace or args.trace,
        workers=args.workers if args.workers is not None else cfg.workers)


def _mode_configs(args, cmd: str):
    """Yield (config, mode_tag) once per distinct drain mode requested."""
    modes = defaults.DRAIN_MODES if args.mode == "all" else (args.mode,)
    seen = []
    for mode in modes:
        cfg = _base_config(cmd, mode)
        if args.config:
            cfg = load_config(args.config, cfg)
        cfg = _apply_flags(cfg, args)
        tag = cfg.waveform.drain_mode
        if tag in seen:
            continue
        seen.append(tag)
        os.makedirs(cfg.out, exist_ok=True)
        yield cfg, tag


def _require_kind(cfg: RunConfig, cmd: str, kinds):
    if cfg.protocol is None or cfg.protocol.kind not in kinds:
        have = None if cfg.protocol is None else cfg.protocol.kind
        raise ConfigError(f"{cmd} needs a protocol of kind {kinds}, "
                          f"config gave {have!r}")


def _side_fits(rows):
    plus = [(r.dt1_ms * 1e-3, r.dw_fg_pct) for r in rows if r.dt1_ms > 0]
    minus = [(r.dt1_ms * 1e-3, r.dw_fg_pct) for r in rows if r.dt1_ms < 0]
    fit_p = fit_exponential_window(plus) if len(plus) >= 2 else None
    fit_m = fit_exponential_window(minus) if len(minus) >= 2 else None
    return fit_p, fit_m


def _fit_rows(fits):
    out = []
    for side, fit in zip(("plus", "minus"), fits):
        if fit is not None:
            out.append((side, fit.amplitude, fit.tau * 1e3,
                        fit.rms_log_residual, fit.n_points))
    return out


def _trace_period(horizon: float) -> float:
    return max(horizon / 20000.0, 1e-6)


def _write_trace(path: str, cfg: RunConfig, spec):
    sched = build_schedule(spec, 0, cfg.waveform)
    amp = replace(cfg.amplitudes, r=spec.compression_r)
    res = integrate(sched, cfg.waveform, amp, cfg.device,
                    sample_period=_trace_period(sched.horizon))
    tr = res.traces
    _write_csv(path, TRACE_HEADER,
               zip(tr.t, tr.v_g, tr.v_tun_eff, tr.v_d, tr.v_fg,
                   tr.i_d, tr.i_inj, tr.i_tun))
    return tr


def cmd_window(args) -> int:
    for cfg, tag in _mode_configs(args, "window"):
        _require_kind(cfg, "window", ("window",))
        rows = run_protocol(cfg.protocol, cfg.waveform, cfg.amplitudes,
                            cfg.device, workers=cfg.workers)
        _write_rows(os.path.join(cfg.out, f"window_{tag}.csv"), rows)
        fits = _side_fits(rows)
        _write_csv(os.path.join(cfg.out, f"window_fit_{tag}.csv"),
                   FIT_HEADER, _fit_rows(fits))
        for side, fit in zip("+-", fits):
            if fit is not None:
                print(f"window[{tag}] A{side} = {fit.amplitude:.4f} %  "
                      f"tau{side} = {fit.tau * 1e3:.3f} ms")
        if cfg.trace:
            _write_trace(os.path.join(cfg.out, f"window_trace_{tag}.csv"),
                         cfg, cfg.protocol)
        if cfg.plot:
            from . import plotting
            plotting.plot_window(rows, fits,
                                 os.path.join(cfg.out, f"window_{tag}.svg"))
    return 0


def cmd_triplet(args) -> int:
    for cfg, tag in _mode_configs(args, "triplet"):
        if cfg.protocol is not None:
            _require_kind(cfg, "triplet", ("triplet1", "triplet2"))
            specs = (cfg.protocol,)
        else:
            specs = (defaults.triplet1_spec(), defaults.triplet2_spec())
        rows_by = [run_protocol(s, cfg.waveform, cfg.amplitudes, cfg.device,
                                workers=cfg.workers) for s in specs]
        allrows = [r for rows in rows_by for r in rows]
        _write_rows(os.path.join(cfg.out, f"triplet_{tag}.csv"), allrows)
        for rows in rows_by:
            mean = sum(r.dw_fg_pct for r in rows) / len(rows)
            print(f"triplet[{tag}] {rows[0].protocol}: "
                  f"mean dw = {mean:.3f} %")
        if cfg.trace:
            _write_trace(os.path.join(cfg.out, f"triplet_trace_{tag}.csv"),
                         cfg, specs[0])
        if cfg.plot:
            from . import plotting
            first = [r for r in allrows if r.protocol == "triplet1"]
            second = [r for r in allrows if r.protocol == "triplet2"]
            plotting.plot_triplet(first, second,
                                  os.path.join(cfg.out, f"triplet_{tag}.svg"))
    return 0


def cmd_quadruplet(args) -> int:
    for cfg, tag in _mode_configs(args, "quadruplet"):
        _require_kind(cfg, "quadruplet", ("quadruplet",))
        rows = run_protocol(cfg.protocol, cfg.waveform, cfg.amplitudes,
                            cfg.device, workers=cfg.workers)
        _write_rows(os.path.join(cfg.out, f"quadruplet_{tag}.csv"), rows)
        sym = _symmetry_metric(rows)
        print(f"quadruplet[{tag}] symmetry metric = {sym:.4f}")
        if cfg.trace:
            _write_trace(os.path.join(cfg.out, f"quadruplet_trace_{tag}.csv"),
                         cfg, cfg.protocol)
        if cfg.plot:
            from . import plotting
            plotting.plot_quadruplet(
                rows, os.path.join(cfg.out, f"quadruplet_{tag}.svg"))
    return 0


def _symmetry_metric(rows) -> float:
    """max |dw(T) - dw(-T)| over the grid, scaled by max |dw|."""
    by_t = {round(r.t_ms, 9): r.dw_fg_pct for r in rows}
    peak = max(abs(v) for v in by_t.values())
    worst = 0.0
    for t_ms, dw in by_t.items():
        if t_ms > 0 and -t_ms in by_t:
            worst = max(worst, abs(dw - by_t[-t_ms]))
    return worst / peak if peak else 0.0


def cmd_frequency(args) -> int:
    for cfg, tag in _mode_configs(args, "frequency"):
        if cfg.protocol is not None:
            _require_kind(cfg, "frequency", ("frequency",))
            specs = (cfg.protocol,)
        else:
            specs = (defaults.frequency_spec(1), defaults.frequency_spec(-1))
        allrows = []
        for s in specs:
            allrows.extend(run_protocol(s, cfg.waveform, cfg.amplitudes,
                                        cfg.device, workers=cfg.workers))
        _write_rows(os.path.join(cfg.out, f"frequency_{tag}.csv"), allrows)
        for s in specs:
            series = [r.dw_fg_pct for r in allrows
                      if r.dt1_ms == s.pair_dt * 1e3]
            print(f"frequency[{tag}] dt={s.pair_dt * 1e3:+g}ms: "
                  + " ".join(f"{v:.2f}" for v in series))
        if cfg.trace:
            _write_trace(os.path.join(cfg.out, f"frequency_trace_{tag}.csv"),
                         cfg, specs[0])
        if cfg.plot:
            from . import plotting
            plus = [r for r in allrows if r.dt1_ms > 0]
            minus = [r for r in allrows if r.dt1_ms < 0]
            plotting.plot_frequency(
                plus, minus, os.path.join(cfg.out, f"frequency_{tag}.svg"))
    return 0


def cmd_waveform(args) -> int:
    for cfg, tag in _mode_configs(args, "waveform"):
        if cfg.protocol is None:
            raise ConfigError("waveform needs a protocol to trace")
        tr = _write_trace(
            os.path.join(cfg.out, f"waveform_traces_{tag}.csv"), cfg,
            cfg.protocol)
        if cfg.plot:
            from . import plotting
            plotting.plot_traces(
                tr, os.path.join(cfg.out, f"waveform_{tag}.svg"))
    return 0


def cmd_circuit(args) -> int:
    cfgs = list(_mode_configs(args, "circuit"))
    cfg = cfgs[0][0]
    sc = ScGeneratorParams.from_targets(cfg.amplitudes, t_sc=1e-3,
                                        v_d_min=cfg.waveform.v_d_min,
                                        v_d_init=cfg.waveform.v_d_init)
    ramp = RampGeneratorParams.from_targets(cfg.amplitudes,
                                            v_d_min=cfg.waveform.v_d_min,
                                            v_d_init=cfg.waveform.v_d_init)
    comps = (compare_generator("single", sc, cfg.amplitudes),
             compare_generator("double", ramp, cfg.amplitudes))
    for comp in comps:
        _write_csv(os.path.join(cfg.out, f"circuit_{comp.kind}.csv"),
                   CIRCUIT_HEADER,
                   zip(comp.dt2 * 1e3, comp.ideal, comp.emulated, comp.error))
        print(f"circuit[{comp.kind}] sup-norm error = "
              f"{comp.sup_error * 1e3:.4f} mV")
    _write_csv(os.path.join(cfg.out, "circuit_summary.csv"),
               ("kind", "sup_error_v", "n_points"),
               [(c.kind, c.sup_error, len(c.dt2)) for c in comps])
    if cfg.plot:
        from . import plotting
        plotting.plot_generator(comps[0], comps[1],
                                os.path.join(cfg.out, "circuit.svg"))
    return 0


def cmd_calibrate(args) -> int:
    cfgs = list(_mode_configs(args, "calibrate"))
    cfg = cfgs[0][0]
    r = cfg.protocol.compression_r if cfg.protocol else 2.0
    report = calibrate_window(defaults.WINDOW_TARGETS, cfg.waveform,
                              cfg.device, amp=cfg.amplitudes, r=r)
    dev = report.device
    names = ("a_plus_pct", "a_minus_pct", "tau_plus_s", "tau_minus_s")
    rows = [("v_ox", dev.v_ox), ("i_tun0", dev.i_tun0),
            ("i_inj0", dev.i_inj0)]
    rows += [(f"target_{n}", v) for n, v in zip(names, report.targets)]
    rows += [(f"achieved_{n}", v) for n, v in zip(names, report.achieved)]
    rows += [("iterations_v_ox", report.iterations[0]),
             ("iterations_i_tun0", report.iterations[1]),
             ("iterations_i_inj0", report.iterations[2])]
    _write_csv(os.path.join(cfg.out, "calibration.csv"),
               ("parameter", "value"), rows)
    print(f"calibrated: v_ox = {dev.v_ox:.6g} V, i_tun0 = {dev.i_tun0:.6g} A,"
          f" i_inj0 = {dev.i_inj0:.6g} A")
    print("achieved: " + "  ".join(
        f"{n} = {v:.6g}" for n, v in zip(names, report.achieved)))
    return 0


_COMMANDS = {
    "window": (cmd_window, "pairing learning window sweep and fit"),
    "triplet": (cmd_triplet, "pre-post-pre and post-pre-post triplet runs"),
    "quadruplet": (cmd_quadruplet, "pair-gap-pair quadruplet sweep"),
    "frequency": (cmd_frequency, "pairing-rate sweep at fixed dt"),
    "waveform": (cmd_waveform, "sampled node traces for one protocol point"),
    "circuit": (cmd_circuit, "drain pulse-depth generators vs ideal laws"),
    "calibrate": (cmd_calibrate, "tune device prefactors to window targets"),
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fgsynapse",
        description="floating-gate synapse experiments: simulate, fit, plot")
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, (fn, help_text) in _COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", metavar="PATH",
                        help="INI file overriding the packaged defaults")
        sp.add_argument("--mode", default="single",
                        choices=("flat", "single", "double", "all"),
                        help="drain pulse mode (default single)")
        sp.add_argument("--out", metavar="DIR",
                        help="output directory (default runs)")
        sp.add_argument("--plot", action="store_true",
                        help="also write SVG plots")
        sp.add_argument("--trace", action="store_true",
                        help="also write node traces for the first point")
        sp.add_argument("--workers", type=int, metavar="N",
                        help="thread pool size for sweep points")
        sp.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, CalibrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ModelRangeError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""INI-style run configuration.

A run is described by one structured-text file whose sections mirror the
parameter dataclasses:

    [device]       DeviceParams fields        (kappa = 0.7, ...)
    [waveform]     WaveformConfig fields      (drain_mode = single, ...)
    [amplitudes]   TripletAmplitudeParams     (a3_plus = 9.1e-3, ...)
    [protocol]     ProtocolSpec fields        (kind = window, points = ...)
    [output]       run plumbing               (out, plot, trace, workers)

Every key is optional; values override the defaults the CLI picked for the
subcommand. Unknown sections or keys are rejected rather than ignored so a
typo cannot silently run the wrong experiment. The engine has no random
number generator; the seedless flag exists to state that and must stay on.
"""

from __future__ import annotations

import ast
import configparser
import types
import typing
from dataclasses import dataclass, fields, replace

from .device import DeviceParams
from .errors import ConfigError
from .protocols import ProtocolSpec
from .waveforms import TripletAmplitudeParams, WaveformConfig


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs, after merging file overrides."""

    device: DeviceParams
    waveform: WaveformConfig
    amplitudes: TripletAmplitudeParams
    protocol: ProtocolSpec | None = None
    out: str = "runs"
    plot: bool = False
    trace: bool = False
    workers: int | None = None
    seedless: bool = True        # documentation: the model is deterministic

    def __post_init__(self):
        if not self.out:
            raise ConfigError("out must be a non-empty directory path")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if not self.seedless:
            raise ConfigError("the model has no RNG; seedless cannot be off")


_OUTPUT_FIELDS = ("out", "plot", "trace", "workers", "seedless")


def _freeze(value):
    if isinstance(value, (list, tuple)):
        return tuple(_freeze(v) for v in value)
    return value


def _parse_bool(text: str, where: str) -> bool:
    try:
        return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]
    except KeyError:
        raise ConfigError(f"{where}: {text!r} is not a boolean") from None


def _coerce(text: str, hint, where: str):
    """Turn a raw INI string into the field's annotated type."""
    text = text.strip()
    origin = typing.get_origin(hint)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(hint) if a is not type(None)]
        if text.lower() in ("", "none"):
            return None
        return _coerce(text, args[0], where)
    try:
        if hint is bool:
            return _parse_bool(text, where)
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
        if hint is str:
            return text
        if hint is tuple or origin is tuple:
            value = _freeze(ast.literal_eval(text))
            if not isinstance(value, tuple):
                raise ValueError("expected a tuple")
            return value
    except ConfigError:
        raise
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unsupported field type {hint!r}")


def _section_kwargs(parser, section: str, cls, where_cls: str):
    hints = typing.get_type_hints(cls)
    known = {f.name: hints[f.name] for f in fields(cls)}
    out = {}
    for key, raw in parser.items(section):
        if key not in known:
            raise ConfigError(f"[{section}] has no key {key!r} "
                              f"(not a {where_cls} field)")
        out[key] = _coerce(raw, known[key], f"[{section}] {key}")
    return out


def load_config(path: str, base: RunConfig) -> RunConfig:
    """Merge the INI file at path over base and revalidate everything."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                       interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None

    section_cls = {"device": DeviceParams, "waveform": WaveformConfig,
                   "amplitudes": TripletAmplitudeParams,
                   "protocol": ProtocolSpec}
    unknown = set(parser.sections()) - set(section_cls) - {"output"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    device, waveform, amplitudes = base.device, base.waveform, base.amplitudes
    protocol = base.protocol
    try:
        if parser.has_section("device"):
            device = replace(device, **_section_kwargs(
                parser, "device", DeviceParams, "DeviceParams"))
        if parser.has_section("waveform"):
            waveform = replace(waveform, **_section_kwargs(
                parser, "waveform", WaveformConfig, "WaveformConfig"))
        if parser.has_section("amplitudes"):
            amplitudes = replace(amplitudes, **_section_kwargs(
                parser, "amplitudes", TripletAmplitudeParams,
                "TripletAmplitudeParams"))
        if parser.has_section("protocol"):
            kwargs = _section_kwargs(parser, "protocol", ProtocolSpec,
                                     "ProtocolSpec")
            if protocol is None:
                if "kind" not in kwargs or "points" not in kwargs:
                    raise ConfigError(
                        "[protocol] must give kind and points when the "
                        "subcommand has no protocol of its own")
                protocol = ProtocolSpec(**kwargs)
            else:
                protocol = replace(protocol, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None

    output = {}
    if parser.has_section("output"):
        hints = typing.get_type_hints(RunConfig)
        for key, raw in parser.items("output"):
            if key not in _OUTPUT_FIELDS:
                raise ConfigError(f"[output] has no key {key!r}")
            output[key] = _coerce(raw, hints[key], f"[output] {key}")

    return replace(base, device=device, waveform=waveform,
                   amplitudes=amplitudes, protocol=protocol, **output)

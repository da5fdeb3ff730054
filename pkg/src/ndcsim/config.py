"""Experiment configuration: dataclass bundle plus the key=value file format.

File format is line-oriented ``key = value`` under the sections [source]
[smf] [dcf] [detector_a] [detector_b] [timer_a] [timer_b] [run].  Lengths are
in km, k2 in s^2/m, rates in Hz; everything is converted to internal units
(fs, ps^2) at parse time.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
from dataclasses import dataclass

from .errors import ConfigError
from .model import DispersionLeg, SourceParams
from .simulate import CORRELATION_MODES, DetectorSpec, TimerSpec


@dataclass(frozen=True)
class RunSpec:
    duration_s: float = 5.0
    mode: str = "anti"

    def __post_init__(self):
        if self.duration_s < 0:
            raise ConfigError("duration_s must be >= 0")
        if self.mode not in CORRELATION_MODES:
            raise ConfigError(f"mode must be one of {CORRELATION_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceParams
    smf: DispersionLeg
    dcf: DispersionLeg
    detector_a: DetectorSpec
    detector_b: DetectorSpec
    timer_a: TimerSpec
    timer_b: TimerSpec
    run: RunSpec

    def manifest(self) -> dict:
        """JSON-ready dictionary of every resolved parameter."""
        return {
            "source": dataclasses.asdict(self.source),
            "smf": dataclasses.asdict(self.smf),
            "dcf": dataclasses.asdict(self.dcf),
            "detector_a": dataclasses.asdict(self.detector_a),
            "detector_b": dataclasses.asdict(self.detector_b),
            "timer_a": dataclasses.asdict(self.timer_a),
            "timer_b": dataclasses.asdict(self.timer_b),
            "run": dataclasses.asdict(self.run),
        }


_SECTIONS = (
    "source", "smf", "dcf", "detector_a", "detector_b", "timer_a", "timer_b", "run",
)


class _Section:
    def __init__(self, parser: configparser.ConfigParser, name: str):
        if not parser.has_section(name):
            raise ConfigError(f"missing section [{name}]")
        self._name = name
        self._sec = parser[name]

    def _raw(self, key: str, default=None):
        if key in self._sec:
            return self._sec[key]
        if default is not None:
            return default
        raise ConfigError(f"missing required key '{key}' in section [{self._name}]")

    def get_float(self, key: str, default=None) -> float:
        raw = self._raw(key, default)
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"key '{key}' in [{self._name}]: not a number: {raw!r}") from exc

    def get_int(self, key: str, default=None) -> int:
        raw = self._raw(key, default)
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"key '{key}' in [{self._name}]: not an integer: {raw!r}") from exc

    def get_str(self, key: str, default=None) -> str:
        return str(self._raw(key, default)).strip()

    def get_optional_float(self, key: str) -> float | None:
        if key not in self._sec:
            return None
        return self.get_float(key)


def _leg(sec: _Section) -> DispersionLeg:
    return DispersionLeg(
        k2_s2_per_m=sec.get_float("k2_s2_per_m", "0"),
        length_km=sec.get_float("length_km"),
        attenuation_db_per_km=sec.get_float("attenuation_db_per_km", "0.2"),
        group_index=sec.get_float("group_index", "1.468"),
    )


def _detector(sec: _Section) -> DetectorSpec:
    return DetectorSpec(
        efficiency=sec.get_float("efficiency"),
        jitter_fwhm_ps=sec.get_float("jitter_fwhm_ps"),
        dark_rate_hz=sec.get_float("dark_rate_hz", "100"),
        dead_time_ns=sec.get_float("dead_time_ns", "40"),
    )


def _timer(sec: _Section) -> TimerSpec:
    return TimerSpec(
        resolution_fs=sec.get_int("resolution_fs", "1000"),
        clock_offset_fs=sec.get_int("clock_offset_fs", "0"),
        site_id=sec.get_int("site_id"),
    )


def parse_config(text_or_path, from_string: bool = False) -> ExperimentConfig:
    """Parse a configuration file (path) or literal text (from_string=True)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        if from_string:
            parser.read_string(text_or_path)
        else:
            with open(text_or_path) as f:
                parser.read_file(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        # configparser messages carry the offending line numbers.
        raise ConfigError(f"config parse error: {exc}") from exc

    src_sec = _Section(parser, "source")
    source = SourceParams(
        crystal_length_cm=src_sec.get_float("crystal_length_cm", "1.0"),
        inverse_gvd_ps_per_cm=src_sec.get_float("inverse_gvd_ps_per_cm", "2.96"),
        gamma=src_sec.get_float("gamma", "0.04822"),
        pair_rate_hz=src_sec.get_float("pair_rate_hz"),
        sigma_omega=src_sec.get_optional_float("sigma_omega_rad_per_ps"),
    )
    run_sec = _Section(parser, "run")
    run = RunSpec(
        duration_s=run_sec.get_float("duration_s"),
        mode=run_sec.get_str("mode", "anti"),
    )
    return ExperimentConfig(
        source=source,
        smf=_leg(_Section(parser, "smf")),
        dcf=_leg(_Section(parser, "dcf")),
        detector_a=_detector(_Section(parser, "detector_a")),
        detector_b=_detector(_Section(parser, "detector_b")),
        timer_a=_timer(_Section(parser, "timer_a")),
        timer_b=_timer(_Section(parser, "timer_b")),
        run=run,
    )


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the key = value file format."""
    parser = configparser.ConfigParser()
    parser["source"] = {
        "crystal_length_cm": repr(cfg.source.crystal_length_cm),
        "inverse_gvd_ps_per_cm": repr(cfg.source.inverse_gvd_ps_per_cm),
        "gamma": repr(cfg.source.gamma),
        "pair_rate_hz": repr(cfg.source.pair_rate_hz),
    }
    if cfg.source.sigma_omega is not None:
        parser["source"]["sigma_omega_rad_per_ps"] = repr(cfg.source.sigma_omega)
    for name, leg in (("smf", cfg.smf), ("dcf", cfg.dcf)):
        parser[name] = {
            "k2_s2_per_m": repr(leg.k2_s2_per_m),
            "length_km": repr(leg.length_km),
            "attenuation_db_per_km": repr(leg.attenuation_db_per_km),
            "group_index": repr(leg.group_index),
        }
    for name, det in (("detector_a", cfg.detector_a), ("detector_b", cfg.detector_b)):
        parser[name] = {
            "efficiency": repr(det.efficiency),
            "jitter_fwhm_ps": repr(det.jitter_fwhm_ps),
            "dark_rate_hz": repr(det.dark_rate_hz),
            "dead_time_ns": repr(det.dead_time_ns),
        }
    for name, timer in (("timer_a", cfg.timer_a), ("timer_b", cfg.timer_b)):
        parser[name] = {
            "resolution_fs": repr(timer.resolution_fs),
            "clock_offset_fs": repr(timer.clock_offset_fs),
            "site_id": repr(timer.site_id),
        }
    parser["run"] = {
        "duration_s": repr(cfg.run.duration_s),
        "mode": cfg.run.mode,
    }
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()

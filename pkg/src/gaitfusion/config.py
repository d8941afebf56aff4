"""Flat ``key=value`` configuration with every tunable and its default."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError

_SECTION = "gait"


@dataclass(frozen=True)
class Config:
    lpf_cutoff_hz: float = 20.0
    lpf_taps: int = 21
    gauss_sigma: float = 5.0
    gauss_taps: int = 7
    psum_taps: int = 23
    psum_nominal_cutoff_hz: float = 0.02
    zv_variance_threshold1: float = 4.0
    zv_variance_threshold2: float = 2.0
    zv_window_samples: int = 10
    zv_gate_lowpass: bool = False  # low-pass the gyro before the variance gate
    stance_rel_threshold: float = 0.2
    ev_window_before: int = 60
    ev_window_after: int = 6
    ev_neighborhood_r: int = 10
    gravity_mps2: float = 9.80665
    zvu_residual_tol_mps: float = 0.02

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(self).items())

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def _coerce(name: str, kind, raw: str):
    try:
        if kind in (bool, "bool"):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind in (int, "int"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"config key {name}: cannot parse {raw!r}") from None


def parse_config(text: str) -> Config:
    """Parse ``key=value`` lines; ``#`` and ``;`` start comments; unknown keys are errors."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(f"[{_SECTION}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    known = {f.name: f.type for f in fields(Config)}
    values = {}
    for key, raw in cp[_SECTION].items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        values[key] = _coerce(key, known[key], raw)
    return Config(**values)


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None

"""End-to-end analysis of a two-foot session."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Config
from .errors import InsufficientAnchors, InsufficientEvents, InvalidSession, NoAnchors, NoBilateralOverlap
from .events import HEEL_STRIKE, EventWindowConfig, GaitEvent, detect_events
from .preprocess import design_lowpass, filter_columns
from .signal_model import SIDES, Diagnostic, FootStream, GaitSession, validate_session
from .spatial import StrideTrajectory, estimate_orientation, session_velocity, zvu_integrate
from .temporal import GaitCycle, Summary, TemporalReport, segment_cycles, temporal_report
from .zv_detect import PressureSums, VarianceGateConfig, ZeroVelocityInterval, detect_zero_velocity, pressure_sums


@dataclass
class FootAnalysis:
    side: str
    sums: PressureSums
    zvs: list[ZeroVelocityInterval]
    events: list[GaitEvent]
    cycles: list[GaitCycle]
    trajectories: list[StrideTrajectory]

    def heel_strike_times_s(self) -> list[float]:
        return [e.t / 1000.0 for e in self.events if e.kind == HEEL_STRIKE]


@dataclass(frozen=True)
class SpatialReport:
    strideLength: Summary  # cm, all strides of both feet
    velocity: Summary      # km/h, one value per stride


@dataclass
class Analysis:
    config: Config
    feet: dict[str, FootAnalysis]
    temporal: TemporalReport | None
    spatial: SpatialReport | None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def gate_config(cfg: Config) -> VarianceGateConfig:
    return VarianceGateConfig(cfg.zv_window_samples, cfg.zv_variance_threshold1,
                              cfg.zv_variance_threshold2, cfg.stance_rel_threshold)


def event_config(cfg: Config) -> EventWindowConfig:
    return EventWindowConfig(cfg.ev_window_before, cfg.ev_window_after, cfg.ev_neighborhood_r)


def analyze_foot(fs: FootStream, cfg: Config, diagnostics: list[Diagnostic]) -> FootAnalysis:
    sums = pressure_sums(fs, cfg.gauss_sigma, cfg.gauss_taps, cfg.psum_taps)
    lpf = design_lowpass(cfg.lpf_cutoff_hz, fs.sample_rate_hz, cfg.lpf_taps)
    gyro = filter_columns(lpf, fs.gyro)
    accel = filter_columns(lpf, fs.accel)
    gate_input = gyro[:, 0] if cfg.zv_gate_lowpass else fs.gyro[:, 0]
    zvs = detect_zero_velocity(sums, gate_input, gate_config(cfg), fs.side, diagnostics)
    events = detect_events(sums, zvs, fs.t_ms, event_config(cfg), diagnostics)
    cycles = segment_cycles(events, diagnostics)
    trajectories: list[StrideTrajectory] = []
    try:
        t_s = fs.t_s
        orientation = estimate_orientation(gyro, accel, zvs, t_s)
        trajectories = zvu_integrate(accel, orientation, zvs, t_s, cfg.gravity_mps2,
                                     cfg.zvu_residual_tol_mps, diagnostics)
    except (NoAnchors, InsufficientAnchors) as exc:
        diagnostics.append(Diagnostic(type(exc).__name__, str(exc), fs.side))
    return FootAnalysis(fs.side, sums, zvs, events, cycles, trajectories)


def spatial_report(feet: dict[str, FootAnalysis]) -> SpatialReport | None:
    strides = [tr for side in SIDES for tr in feet[side].trajectories]
    if not strides:
        return None
    return SpatialReport(
        Summary.of(tr.strideLength for tr in strides),
        Summary.of(session_velocity([tr], tr.duration_s) for tr in strides),
    )


def analyze_session(session: GaitSession, cfg: Config | None = None) -> Analysis:
    """Events, cycles, temporal and spatial parameters for both feet.

    Raises ``InvalidSession`` when the session breaks a data-model invariant;
    recoverable findings are collected as diagnostics.
    """
    cfg = cfg or Config()
    found = validate_session(session)
    errors = [d for d in found if d.severity == "error"]
    if errors:
        raise InvalidSession(errors)
    diagnostics = list(found)
    feet = {side: analyze_foot(session.foot(side), cfg, diagnostics) for side in SIDES}
    temporal = None
    try:
        L, R = feet[SIDES[0]], feet[SIDES[1]]
        temporal = temporal_report(L.cycles, R.cycles, L.heel_strike_times_s(), R.heel_strike_times_s(), diagnostics)
    except (NoBilateralOverlap, InsufficientEvents) as exc:
        diagnostics.append(Diagnostic(type(exc).__name__, str(exc)))
    return Analysis(cfg, feet, temporal, spatial_report(feet), diagnostics)


def zero_velocity_mask(n: int, zvs) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    for z in zvs:
        mask[z.startIdx:z.endIdx + 1] = True
    return mask

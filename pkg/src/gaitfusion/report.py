"""Structured-text gait report and per-sample plot data."""

from __future__ import annotations

import csv
import io
import math

import yaml

from .pipeline import Analysis, zero_velocity_mask
from .signal_model import SIDES, GaitSession
from .temporal import Summary, stance_swing

REPORT_FORMAT = "gait-report/1"


class _Dumper(getattr(yaml, "CSafeDumper", yaml.SafeDumper)):
    """Safe dumper, libyaml-backed when available (same bytes, faster)."""

    def ignore_aliases(self, data) -> bool:
        # the report tree never shares nodes, so skip anchor bookkeeping
        return True

# report key, temporal attribute
_TEMPORAL_ROWS = (
    ("stance_left_pct", "STP_left"),
    ("swing_left_pct", "SWP_left"),
    ("stance_right_pct", "STP_right"),
    ("swing_right_pct", "SWP_right"),
    ("double_stance_pct", "DSP"),
    ("step_time_left_s", "STT_left"),
    ("step_time_right_s", "STT_right"),
    ("stride_time_s", "STRT"),
)


def _num(x: float) -> float | None:
    x = float(x)
    return None if math.isnan(x) else x


def _summary(s: Summary) -> dict:
    return {"mean": _num(s.mean), "sd": _num(s.sd), "n": s.n}


def report_dict(analysis: Analysis, session: GaitSession) -> dict:
    """Plain nested mapping of the report; no file paths, so equal inputs give equal reports."""
    params: dict = {}
    t = analysis.temporal
    for key, attr in _TEMPORAL_ROWS:
        params[key] = _summary(getattr(t, attr)) if t is not None else None
    params["cadence_spm"] = _num(t.CAD) if t is not None else None
    sp = analysis.spatial
    params["stride_length_cm"] = _summary(sp.strideLength) if sp is not None else None
    params["velocity_kmh"] = _summary(sp.velocity) if sp is not None else None

    cycles = []
    for side in SIDES:
        for c in analysis.feet[side].cycles:
            stp, swp = stance_swing(c)
            cycles.append({
                "foot": side, "hs_start": c.hsStart, "toe_on": c.toeOn, "heel_off": c.heelOff,
                "toe_off": c.toeOff, "hs_end": c.hsEnd, "gc_s": c.GC, "stance_pct": stp, "swing_pct": swp,
            })
    strides = []
    for side in SIDES:
        for tr in analysis.feet[side].trajectories:
            strides.append({
                "foot": side, "start": tr.startIdx, "end": tr.endIdx, "duration_s": tr.duration_s,
                "length_cm": tr.strideLength, "velocity_kmh": 3.6 / 100.0 * tr.strideLength / tr.duration_s,
            })
    return {
        "format": REPORT_FORMAT,
        "session": {
            side: {"samples": len(session.foot(side)), "sample_rate_hz": session.foot(side).sample_rate_hz}
            for side in SIDES
        },
        "parameters": params,
        "events": {
            side: [[e.kind, e.idx, e.t] for e in analysis.feet[side].events] for side in SIDES
        },
        "zero_velocity": {
            side: [[z.startIdx, z.endIdx] for z in analysis.feet[side].zvs] for side in SIDES
        },
        "cycles": cycles,
        "strides": strides,
        "diagnostics": [
            {"code": d.code, "severity": d.severity, "foot": d.side, "index": d.index, "message": d.message}
            for d in analysis.diagnostics
        ],
        "config": analysis.config.as_dict(),
    }


def render_report(analysis: Analysis, session: GaitSession) -> str:
    return yaml.dump(report_dict(analysis, session), Dumper=_Dumper, sort_keys=False, default_flow_style=None,
                     width=120)


def load_report(text: str) -> dict:
    return yaml.safe_load(text)


PLOT_COLUMNS = ("idx", "t_ms", "foot", "P1", "P2", "P", "zv", "event")


def render_plot_data(analysis: Analysis, session: GaitSession) -> str:
    """One row per sample and foot: smoothed pressure curves, foot-flat flag and event name."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for side in SIDES:
        fa = analysis.feet[side]
        fs = session.foot(side)
        zv = zero_velocity_mask(len(fs), fa.zvs)
        marks = {}
        for e in fa.events:
            marks[e.idx] = f"{marks[e.idx]}|{e.kind}" if e.idx in marks else e.kind
        for i in range(len(fs)):
            w.writerow((i, repr(float(fs.t_ms[i])), side, repr(float(fa.sums.P1[i])), repr(float(fa.sums.P2[i])),
                        repr(float(fa.sums.P[i])), int(zv[i]), marks.get(i, "")))
    return buf.getvalue()

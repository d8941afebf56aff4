import numpy as np
import pytest

from conftest import synth_analysis, synth_session
from gaitfusion.events import GaitEvent
from gaitfusion.pipeline import analyze_session
from gaitfusion.report import (
    PLOT_COLUMNS,
    REPORT_FORMAT,
    _summary,
    load_report,
    render_plot_data,
    render_report,
    report_dict,
)
from gaitfusion.temporal import Summary, segment_cycles, temporal_report


@pytest.fixture(scope="module")
def stroke():
    session, _ = synth_session("stroke-left", 30.0, 5)
    analysis = synth_analysis("stroke-left", 30.0, 5)
    return session, analysis, load_report(render_report(analysis, session))


def test_report_layout(stroke):
    _, _, rep = stroke
    assert rep["format"] == REPORT_FORMAT
    assert list(rep) == ["format", "session", "parameters", "events", "zero_velocity", "cycles", "strides",
                         "diagnostics", "config"]
    assert set(rep["parameters"]) == {
        "stance_left_pct", "swing_left_pct", "stance_right_pct", "swing_right_pct", "double_stance_pct",
        "step_time_left_s", "step_time_right_s", "stride_time_s", "cadence_spm", "stride_length_cm", "velocity_kmh",
    }
    assert rep["config"]["lpf_taps"] == 21


def test_report_stance_swing_sum(stroke):
    _, _, rep = stroke
    p = rep["parameters"]
    assert p["stance_left_pct"]["mean"] + p["swing_left_pct"]["mean"] == 100.0
    assert p["stance_right_pct"]["mean"] + p["swing_right_pct"]["mean"] == 100.0
    for c in rep["cycles"]:
        assert c["stance_pct"] + c["swing_pct"] == 100.0


def test_report_is_recomputable_from_its_event_table(stroke):
    _, _, rep = stroke
    cycles = {}
    for side in ("L", "R"):
        events = [GaitEvent(kind, idx, t, side) for kind, idx, t in rep["events"][side]]
        cycles[side] = segment_cycles(events)
    strikes = {s: [t / 1000.0 for k, _, t in rep["events"][s] if k == "HeelStrike"] for s in ("L", "R")}
    t = temporal_report(cycles["L"], cycles["R"], strikes["L"], strikes["R"])
    p = rep["parameters"]
    for key, attr in (("stance_left_pct", "STP_left"), ("swing_left_pct", "SWP_left"),
                      ("stance_right_pct", "STP_right"), ("swing_right_pct", "SWP_right"),
                      ("double_stance_pct", "DSP"), ("step_time_left_s", "STT_left"),
                      ("step_time_right_s", "STT_right"), ("stride_time_s", "STRT")):
        assert p[key]["mean"] == getattr(t, attr).mean, key
        assert p[key]["sd"] == getattr(t, attr).sd, key
    assert p["cadence_spm"] == t.CAD
    lengths = [s["length_cm"] for s in rep["strides"]]
    assert p["stride_length_cm"]["mean"] == pytest.approx(np.mean(lengths), rel=1e-12)
    assert p["velocity_kmh"]["mean"] == pytest.approx(np.mean([s["velocity_kmh"] for s in rep["strides"]]), rel=1e-12)


def test_report_is_bit_identical_on_rerun(stroke):
    session, analysis, _ = stroke
    assert render_report(analyze_session(session), session) == render_report(analysis, session)


def test_short_walk_reports_nulls():
    # 2 s holds no complete cycle on the right foot, so temporal rows are empty
    session, _ = synth_session("normal", 2.0, 0)
    rep = load_report(render_report(analyze_session(session), session))
    temporal = [k for k in rep["parameters"] if k not in ("stride_length_cm", "velocity_kmh")]
    assert all(rep["parameters"][k] is None for k in temporal)
    assert "NoBilateralOverlap" in [d["code"] for d in rep["diagnostics"]]


def test_empty_summary_is_null():
    assert _summary(Summary.of([])) == {"mean": None, "sd": None, "n": 0}


def test_plot_data(stroke):
    session, analysis, _ = stroke
    lines = render_plot_data(analysis, session).splitlines()
    assert lines[0] == ",".join(PLOT_COLUMNS)
    assert len(lines) == 1 + len(session.left) + len(session.right)
    rows = [ln.split(",") for ln in lines[1:]]
    zv = analysis.feet["L"].zvs[0]
    assert rows[zv.startIdx][6] == "1" and rows[zv.startIdx - 1][6] == "0"
    assert "ToeOn" in rows[zv.startIdx][7]
    assert float(rows[10][3]) == analysis.feet["L"].sums.P1[10]


def test_report_dict_has_no_paths(stroke):
    session, analysis, _ = stroke
    assert "input" not in report_dict(analysis, session)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synth_session
from gaitfusion.errors import MalformedRow, NonMonotoneTime, OutOfRangeValue
from gaitfusion.signal_model import (
    CSV_HEADER,
    FootStream,
    GaitSession,
    SensorFrame,
    contiguous_segments,
    format_float,
    iter_csv_rows,
    parse_log,
    quantize,
    serialize_log,
    session_from_rows,
    validate_session,
)

ROW_L = "0,L,0,0,1,0,0,0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8"
ROW_R = "0,R,0,0,1,0,0,0,0,0,0,0,0,0,0,0"


def _stream(side, n, dt=1000.0 / 66, t0=0.0):
    t = t0 + np.arange(n) * dt
    return FootStream(side, quantize(t), np.tile([0, 0, 1.0], (n, 1)), np.zeros((n, 3)), np.full((n, 8), 0.2))


def test_minimal_log_one_frame_per_foot():
    s = parse_log(f"{CSV_HEADER}\n{ROW_L}\n{ROW_R}\n")
    assert len(s.left) == 1 and len(s.right) == 1
    assert s.left.frame(0) == SensorFrame(0.0, (0.0, 0.0, 1.0), (0.0, 0.0, 0.0),
                                          (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8))


@pytest.mark.parametrize("bad, exc", [
    (ROW_L.replace("0.3,", "1.3,", 1), OutOfRangeValue),
    (ROW_L.replace("0.3,", "-0.1,", 1), OutOfRangeValue),
    ("0,L,0,0,1", MalformedRow),
    (ROW_L.replace(",L,", ",X,"), MalformedRow),
    (ROW_L.replace("0.5", "abc"), MalformedRow),
    (ROW_L.replace("0.5", "nan"), MalformedRow),
    (ROW_L.replace("0.5", "0_5"), MalformedRow),
    # a foot letter outside the foot column, or a numeric foot code
    ("0,L,1,R,1,0,0,0,0,0,0,0,0,0,0,0", MalformedRow),
    ("0,1,L,1,0,0,0,0,0,0,0,0,0,0,0,0", MalformedRow),
    ("0,LR,0,1,0,0,0,0,0,0,0,0,0,0,0,0", MalformedRow),
])
def test_bad_rows_are_rejected(bad, exc):
    with pytest.raises(exc):
        parse_log(f"{CSV_HEADER}\n{bad}\n")
    # also when surrounded by good rows, so the vectorized path sees it first
    with pytest.raises(exc, match="line 3"):
        parse_log(f"{CSV_HEADER}\n{ROW_R}\n{bad}\n{ROW_L.replace('0,L', '20,L', 1)}\n")


def test_crlf_log_parses_like_lf():
    text = f"{CSV_HEADER}\n{ROW_L}\n{ROW_R}\n"
    assert parse_log(text.replace("\n", "\r\n")) == parse_log(text)


def test_malformed_row_names_its_line():
    with pytest.raises(MalformedRow, match="line 3"):
        parse_log(f"{CSV_HEADER}\n{ROW_L}\n1,L,2\n")


def test_missing_header():
    with pytest.raises(MalformedRow, match="line 1"):
        parse_log(f"{ROW_L}\n")


def test_duplicate_timestamp_raises():
    with pytest.raises(NonMonotoneTime):
        parse_log(f"{CSV_HEADER}\n{ROW_L}\n{ROW_L}\n")


def test_rows_are_sorted_per_foot():
    late = ROW_L.replace("0,L", "30,L", 1)
    s = parse_log(f"{CSV_HEADER}\n{late}\n{ROW_L}\n{ROW_R}\n")
    assert s.left.t_ms.tolist() == [0.0, 30.0]


def test_adc_full_scale_normalizes_pressure():
    row = "0,L,0,0,1,0,0,0,512,1023,0,0,0,0,0,0"
    s = parse_log(f"{CSV_HEADER}\n{row}\n{ROW_R}\n", adc_full_scale=1023.0)
    assert s.left.pressure[0, 1] == 1.0
    assert s.left.pressure[0, 0] == pytest.approx(512 / 1023)


def test_generated_log_round_trip_and_rate():
    session, _ = synth_session("normal", 60.0, 1)
    parsed = parse_log(serialize_log(session))
    assert len(parsed.left) == 3960 and len(parsed.right) == 3960
    assert parsed.left == session.left and parsed.right == session.right
    assert parsed.left.sample_rate_hz == pytest.approx(66.0, rel=1e-6)
    assert validate_session(parsed) == []


def test_fast_path_matches_row_parser():
    session, _ = synth_session("stroke-left", 20.0, 3)
    text = serialize_log(session).decode()
    fast = parse_log(text)
    slow = session_from_rows(iter_csv_rows(text))
    assert fast == slow


frame_values = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)
pressure_values = st.floats(min_value=0.0, max_value=1.0)


@st.composite
def sessions(draw):
    streams = {}
    for side in ("L", "R"):
        n = draw(st.integers(1, 6))
        steps = draw(st.lists(st.floats(0.001, 100.0), min_size=n, max_size=n))
        t = quantize(np.cumsum(steps))
        t = np.unique(t)
        n = len(t)
        acc = quantize(draw(st.lists(frame_values, min_size=3 * n, max_size=3 * n)))
        gyr = quantize(draw(st.lists(frame_values, min_size=3 * n, max_size=3 * n)))
        prs = quantize(draw(st.lists(pressure_values, min_size=8 * n, max_size=8 * n)))
        streams[side] = FootStream(side, t, acc.reshape(n, 3), gyr.reshape(n, 3), prs.reshape(n, 8))
    return GaitSession(streams["L"], streams["R"])


@settings(max_examples=60, deadline=None)
@given(sessions())
def test_serialize_parse_identity(s):
    text = serialize_log(s)
    assert parse_log(text) == s
    assert session_from_rows(iter_csv_rows(text.decode())) == s


@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_format_float_round_trips_at_six_digits(x):
    q = float(quantize(x))
    assert float(format_float(q)) == q


def test_validate_clean_session():
    session, _ = synth_session("normal", 10.0, 0)
    assert validate_session(session) == []


def test_validate_duplicated_timestamp():
    s = _stream("L", 100)
    t = s.t_ms.copy()
    t[40] = t[39]
    bad = GaitSession(s.replace(t_ms=t, sample_rate_hz=66.0), _stream("R", 100))
    diags = validate_session(bad)
    assert [(d.code, d.index) for d in diags] == [("NonMonotoneTime", 40)]


def test_validate_no_bilateral_overlap():
    left = _stream("L", 66 * 3)
    right = _stream("R", 66 * 3, t0=5000.0)
    codes = [d.code for d in validate_session(GaitSession(left, right))]
    assert codes == ["NoBilateralOverlap"]


def test_validate_out_of_range_and_gap():
    s = _stream("L", 200)
    p = s.pressure.copy()
    p[7, 2] = 1.5
    t = s.t_ms.copy()
    t[100:] += 200.0
    bad = s.replace(pressure=p, t_ms=t, sample_rate_hz=66.0)
    codes = {d.code for d in validate_session(GaitSession(bad, _stream("R", 200)))}
    assert codes == {"OutOfRangeValue", "SampleGap"}
    assert contiguous_segments(bad) == [(0, 100), (100, 200)]


def test_streams_are_immutable():
    s = _stream("L", 5)
    with pytest.raises(AttributeError):
        s.side = "R"
    with pytest.raises(ValueError):
        s.pressure[0, 0] = 0.5

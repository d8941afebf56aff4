import numpy as np
import pytest

from conftest import synth_session
from gaitfusion.errors import DurationTooShort, InputError
from gaitfusion.events import HEEL_OFF, HEEL_STRIKE, TOE_OFF, TOE_ON
from gaitfusion.signal_model import serialize_log, validate_session
from gaitfusion.synth import (
    GaitProfile,
    generate,
    normal_profile,
    profile_by_name,
    stroke_profile,
    true_parameters,
)
from gaitfusion.temporal import GaitCycle, double_stance, stance_swing, step_stride_cadence


def truth_cycles(truth, side):
    st = truth.stances[side]
    out = []
    for a, b in zip(st, st[1:]):
        idx = [0, 1, 2, 3, 4]
        out.append(GaitCycle(side, *idx, a.hs, a.toe_on, a.heel_off, a.toe_off, b.hs))
    return out


def test_noiseless_truth_reproduces_profile():
    p = normal_profile().noiseless()
    _, truth = generate(p, 10.0)
    params = truth.params
    assert params["stance_left_pct"] == p.stance_percent
    assert params["stance_right_pct"] == p.stance_percent
    assert params["swing_left_pct"] == 100.0 - p.stance_percent
    assert params["stride_time_s"] == p.stride_time_s
    assert params["stride_length_cm"] == p.stride_length_cm
    assert params["cadence_spm"] == 120.0
    assert params["velocity_kmh"] == pytest.approx(4.32, rel=1e-12)


@pytest.mark.parametrize("profile", ["normal", "stroke-left", "stroke-right"])
def test_truth_self_consistency(profile):
    _, truth = synth_session(profile, 30.0, 1)
    p = truth.params
    for side, key in (("L", "stance_left_pct"), ("R", "stance_right_pct")):
        cycles = truth_cycles(truth, side)
        for c in cycles:
            stp, swp = stance_swing(c)
            assert stp == pytest.approx(p[key], rel=1e-12)
            assert stp + swp == 100.0
            assert c.GC == pytest.approx(p["stride_time_s"], rel=1e-12)
    dsp = double_stance(truth_cycles(truth, "L"), truth_cycles(truth, "R"))
    assert np.allclose(dsp, p["double_stance_pct"], rtol=1e-12)
    steps = step_stride_cadence([s.hs for s in truth.stances["L"]], [s.hs for s in truth.stances["R"]])
    assert np.allclose(steps.step_left, p["step_time_left_s"], rtol=1e-12)
    assert np.allclose(steps.step_right, p["step_time_right_s"], rtol=1e-12)
    assert steps.STRT == pytest.approx(p["stride_time_s"], rel=1e-12)
    assert p["velocity_kmh"] == pytest.approx(3.6 / 100 * p["stride_length_cm"] / p["stride_time_s"], rel=1e-15)
    for side in ("L", "R"):
        assert truth.stride_lengths_cm[side] == [p["stride_length_cm"]] * (len(truth.zero_velocity[side]) - 1)


def test_truth_events_and_intervals_are_consistent():
    _, truth = synth_session("stroke-left", 30.0, 1)
    for side in ("L", "R"):
        ons = set(truth.event_indices(side, TOE_ON))
        offs = set(truth.event_indices(side, HEEL_OFF))
        for z in truth.zero_velocity[side]:
            assert z.startIdx in ons and z.endIdx in offs
        kinds = [e.kind for e in truth.events[side]]
        assert set(kinds) == {HEEL_STRIKE, TOE_ON, HEEL_OFF, TOE_OFF}


def test_determinism():
    p = profile_by_name("stroke-right", seed=42)
    a, ta = generate(p, 10.0)
    b, tb = generate(p, 10.0)
    assert serialize_log(a) == serialize_log(b)
    assert ta.to_dict() == tb.to_dict()
    c, _ = generate(profile_by_name("stroke-right", seed=43), 10.0)
    assert serialize_log(c) != serialize_log(a)


def test_stroke_profile_sits_in_table_bands():
    p = stroke_profile()
    params = true_parameters(p)
    assert p.stance_percent == 80.0 and p.stride_length_cm == 48.5 and p.stride_time_s == 2.2
    bands = {
        "stance_left_pct": (78.741, 9.047),
        "stance_right_pct": (82.819, 8.117),
        "double_stance_pct": (61.607, 8.640),
        "step_time_left_s": (1.157, 0.458),
        "step_time_right_s": (1.034, 0.355),
        "stride_time_s": (2.176, 0.762),
        "cadence_spm": (62.150, 19.834),
        "stride_length_cm": (48.544, 14.946),
        "velocity_kmh": (0.910, 0.48),
    }
    for key, (mean, sd) in bands.items():
        assert mean - sd <= params[key] <= mean + sd, key


@pytest.mark.parametrize("side, longer", [("L", "stance_left_pct"), ("R", "stance_right_pct")])
def test_stroke_asymmetry_on_named_side(side, longer):
    params = true_parameters(stroke_profile(side))
    other = "stance_right_pct" if longer == "stance_left_pct" else "stance_left_pct"
    assert params[longer] > params[other]


def test_generated_session_is_valid():
    session, truth = synth_session("normal", 10.0, 0)
    assert validate_session(session) == []
    assert len(session.left) == 660
    assert truth.duration_s == pytest.approx(10.0)


def test_noise_free_sensors_at_rest_read_gravity():
    session, truth = synth_session("normal", 10.0, 0, noiseless=True)
    z = truth.zero_velocity["L"][0]
    acc = session.left.accel[z.startIdx + 2:z.endIdx - 1]
    assert np.allclose(acc, [0.0, 0.0, 1.0], atol=1e-6)
    assert np.allclose(session.left.gyro[z.startIdx + 2:z.endIdx - 1], 0.0, atol=1e-6)


def test_pressure_phasing():
    session, truth = synth_session("normal", 10.0, 0, noiseless=True)
    p = session.left.pressure
    hs = truth.event_indices("L", HEEL_STRIKE)[1]
    to = next(i for i in truth.event_indices("L", TOE_OFF) if i > hs)
    # hindfoot loads first; forefoot unloads last
    assert p[hs + 3, 6] > 0 and p[hs + 3, 2] < p[hs + 3, 6]
    assert p[to - 3, 2] > 0 and p[to - 3, 6] == 0
    assert np.all(p[to + 1:to + 5] == 0)


def test_duration_too_short():
    with pytest.raises(DurationTooShort):
        generate(normal_profile(), 0.5)


@pytest.mark.parametrize("kw", [
    dict(stance_percent=100.0),
    dict(stance_percent=0.0),
    dict(stride_length_cm=-1.0),
    dict(accel_noise_g=-0.1),
    dict(stance_percent=45.0),            # flight phase
    dict(pressure_edge_s=0.0),
    dict(load_fraction=0.6, push_fraction=0.5),
])
def test_profile_invariants(kw):
    with pytest.raises(InputError):
        GaitProfile(**kw)


def test_unknown_profile():
    with pytest.raises(InputError):
        profile_by_name("marathon")

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import synth_analysis, synth_session
from gaitfusion.errors import InsufficientEvents, NoBilateralOverlap
from gaitfusion.events import HEEL_OFF, HEEL_STRIKE, TOE_OFF, TOE_ON, GaitEvent
from gaitfusion.temporal import (
    GaitCycle,
    Summary,
    double_stance,
    double_stance_cycle,
    segment_cycles,
    stance_swing,
    step_stride_cadence,
    temporal_report,
)

RATE = 66.0


def cycle(side, hs, on, off, to, he):
    """Cycle from times in seconds; indices follow at the nominal rate."""
    idx = [int(round(t * RATE)) for t in (hs, on, off, to, he)]
    return GaitCycle(side, *idx, hs, on, off, to, he)


def quad(side, hs_idx, gc=66):
    return [
        GaitEvent(HEEL_STRIKE, hs_idx, hs_idx * 1000 / RATE, side),
        GaitEvent(TOE_ON, hs_idx + 7, (hs_idx + 7) * 1000 / RATE, side),
        GaitEvent(HEEL_OFF, hs_idx + 25, (hs_idx + 25) * 1000 / RATE, side),
        GaitEvent(TOE_OFF, hs_idx + 40, (hs_idx + 40) * 1000 / RATE, side),
    ]


def test_four_strikes_make_three_cycles():
    events = [e for k in range(4) for e in quad("L", 10 + 66 * k)]
    diags = []
    cycles = segment_cycles(events, diags)
    assert len(cycles) == 3
    assert [c.hsStart for c in cycles] == [10, 76, 142]
    assert cycles[0].GC == pytest.approx(1.0)
    # the last strike's own quadruple trails the final cycle
    assert [d.code for d in diags] == ["IncompleteCycle"]


def test_single_strike_has_no_cycle():
    assert segment_cycles(quad("L", 5)) == []
    assert segment_cycles([]) == []


def test_cycle_with_missing_event_is_excluded():
    events = [e for k in range(3) for e in quad("L", 66 * k)]
    events = [e for e in events if not (e.kind == HEEL_OFF and e.idx == 66 + 25)]
    diags = []
    cycles = segment_cycles(events, diags)
    assert [c.hsStart for c in cycles] == [0]
    assert "IncompleteCycle" in [d.code for d in diags]


def test_cycle_order_invariant():
    with pytest.raises(ValueError):
        cycle("L", 0.0, 0.5, 0.2, 0.6, 1.0)


@pytest.mark.parametrize("profile, expected", [("normal", 59), ("stroke-left", 26)])
def test_synthetic_cycle_count(profile, expected):
    session, _ = synth_session(profile, 60.0, 21)
    a = synth_analysis(profile, 60.0, 21)
    for side in ("L", "R"):
        assert abs(len(a.feet[side].cycles) - expected) <= 1


def test_stance_swing_example():
    assert stance_swing(cycle("L", 0.0, 0.1, 0.4, 0.6, 1.0)) == (60.0, 40.0)


def test_stance_swing_limit():
    c = GaitCycle("L", 0, 10, 30, 65, 66, 0.0, 0.15, 0.45, 1.0, 1.0)
    assert stance_swing(c) == (100.0, 0.0)


@settings(max_examples=200)
@given(
    st.floats(-1e4, 1e4),
    st.floats(0.01, 10.0),
    st.floats(0.01, 0.99),
)
def test_stance_plus_swing_is_exactly_100(t0, gc, frac):
    to = t0 + frac * gc
    he = t0 + gc
    assume(t0 < to < he)
    c = GaitCycle("L", 0, 1, 2, 3, 4, t0, t0, to, to, he)
    stp, swp = stance_swing(c)
    assert stp + swp == 100.0


def test_stroke_profile_has_long_stance():
    a = synth_analysis("stroke-left", 60.0, 21)
    for key in ("STP_left", "STP_right"):
        assert 78.0 <= getattr(a.temporal, key).mean <= 83.5


def test_double_stance_full_and_disjoint():
    ref = GaitCycle("L", 0, 10, 30, 65, 66, 0.0, 0.15, 0.45, 1.0, 1.0)
    always = [cycle("R", -0.5, -0.4, -0.2, 1.5, 2.0)]
    assert double_stance_cycle(ref, always) == 100.0
    short = cycle("L", 0.0, 0.1, 0.2, 0.3, 1.0)
    late = [cycle("R", 0.5, 0.6, 0.7, 0.8, 1.5)]
    assert double_stance_cycle(short, late) == 0.0


def test_double_stance_partial():
    left = [cycle("L", 0.0, 0.1, 0.4, 0.6, 1.0)]
    right = [cycle("R", -0.5, -0.4, -0.2, 0.1, 0.5), cycle("R", 0.5, 0.6, 0.9, 1.1, 1.5)]
    # overlaps [0, 0.1] and [0.5, 0.6]
    assert double_stance_cycle(left[0], right) == pytest.approx(20.0)
    assert double_stance(left, right) == [pytest.approx(20.0)]


def test_double_stance_needs_both_feet():
    with pytest.raises(NoBilateralOverlap):
        double_stance([cycle("L", 0.0, 0.1, 0.4, 0.6, 1.0)], [])
    with pytest.raises(NoBilateralOverlap):
        double_stance([cycle("L", 0.0, 0.1, 0.4, 0.6, 1.0)], [cycle("R", 5.0, 5.1, 5.4, 5.6, 6.0)])


@pytest.mark.parametrize("profile", ["normal", "stroke-left", "stroke-right"])
def test_double_stance_matches_truth(profile):
    _, truth = synth_session(profile, 60.0, 21, noiseless=True)
    a = synth_analysis(profile, 60.0, 21, noiseless=True)
    # percentage points; truth events sit between samples
    assert abs(a.temporal.DSP.mean - truth.params["double_stance_pct"]) <= 2.0


def test_step_example():
    st_ = step_stride_cadence([0.0, 1.0], [0.5])
    assert st_.step_left == (0.5,) and st_.step_right == (0.5,)
    assert st_.STRT == 1.0


def test_cadence_example():
    left = np.arange(61) * 1.0
    right = left[:-1] + 0.5
    st_ = step_stride_cadence(left, right)
    assert st_.CAD == pytest.approx(120.0)


@pytest.mark.parametrize("left, right", [([], []), ([1.0], []), ([0.0, 1.0], [])])
def test_insufficient_strikes(left, right):
    with pytest.raises(InsufficientEvents):
        step_stride_cadence(left, right)


def test_symmetric_gait_step_times():
    a = synth_analysis("normal", 60.0, 21)
    assert abs(a.temporal.STT_left.mean - a.temporal.STT_right.mean) < 1.0 / RATE


@pytest.mark.parametrize("profile", ["normal", "stroke-left", "stroke-right"])
def test_temporal_identities_on_synthetic(profile):
    a = synth_analysis(profile, 60.0, 21)
    t = a.temporal
    for side in ("L", "R"):
        for c in a.feet[side].cycles:
            stp, swp = stance_swing(c)
            assert stp + swp == 100.0
    assert t.STP_left.mean + t.SWP_left.mean == 100.0
    assert t.STP_right.mean + t.SWP_right.mean == 100.0
    assert abs(t.STRT.mean - (t.STT_left.mean + t.STT_right.mean)) <= 1.0 / RATE
    mean_step = np.mean([*t.STT_left.values, *t.STT_right.values])
    assert t.CAD == pytest.approx(60.0 / mean_step, rel=0.02)


def _shift_cycles(cycles, dt):
    return [replace(c, t_hsStart=c.t_hsStart + dt, t_toeOn=c.t_toeOn + dt, t_heelOff=c.t_heelOff + dt,
                    t_toeOff=c.t_toeOff + dt, t_hsEnd=c.t_hsEnd + dt) for c in cycles]


@settings(max_examples=25, deadline=None)
@given(st.floats(-3600.0, 3600.0))
def test_time_shift_invariance(dt):
    a = synth_analysis("stroke-right", 30.0, 8)
    L, R = a.feet["L"], a.feet["R"]
    base = temporal_report(L.cycles, R.cycles, L.heel_strike_times_s(), R.heel_strike_times_s()).means()
    moved = temporal_report(
        _shift_cycles(L.cycles, dt), _shift_cycles(R.cycles, dt),
        [t + dt for t in L.heel_strike_times_s()], [t + dt for t in R.heel_strike_times_s()],
    ).means()
    for k, v in base.items():
        assert moved[k] == pytest.approx(v, rel=1e-9, abs=1e-9), k


def test_summary_population_sd():
    s = Summary.of([1.0, 3.0])
    assert (s.mean, s.sd, s.n) == (2.0, 1.0, 2)
    assert np.isnan(Summary.of([]).mean)

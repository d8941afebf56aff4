"""Gait-cycle segmentation and the temporal gait parameters.

Stance/swing split each cycle at toe off; double stance is the time both feet
are loaded; step time is measured between consecutive opposite-foot heel
strikes; cadence counts steps between the first and last strike.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InsufficientEvents, NoBilateralOverlap
from .events import HEEL_OFF, HEEL_STRIKE, TOE_OFF, TOE_ON, GaitEvent
from .signal_model import LEFT, RIGHT, Diagnostic


@dataclass(frozen=True)
class GaitCycle:
    """One heel-strike-to-heel-strike cycle; indices are samples, times seconds."""

    side: str
    hsStart: int
    toeOn: int
    heelOff: int
    toeOff: int
    hsEnd: int
    t_hsStart: float
    t_toeOn: float
    t_heelOff: float
    t_toeOff: float
    t_hsEnd: float

    def __post_init__(self):
        if not self.hsStart < self.toeOn < self.heelOff < self.toeOff < self.hsEnd:
            raise ValueError(
                f"cycle events out of order: {self.hsStart}, {self.toeOn}, {self.heelOff}, {self.toeOff}, {self.hsEnd}"
            )
        if not self.GC > 0:
            raise ValueError("cycle duration must be positive")

    @property
    def GC(self) -> float:
        return self.t_hsEnd - self.t_hsStart

    @property
    def stance_interval(self) -> tuple[float, float]:
        return self.t_hsStart, self.t_toeOff


@dataclass(frozen=True)
class Summary:
    """Per-cycle values with mean and population standard deviation."""

    values: tuple[float, ...]
    mean: float
    sd: float

    @classmethod
    def of(cls, values: Iterable[float]) -> "Summary":
        v = tuple(float(x) for x in values)
        if not v:
            return cls((), float("nan"), float("nan"))
        a = np.asarray(v)
        return cls(v, float(a.mean()), float(a.std()))

    @property
    def n(self) -> int:
        return len(self.values)


def _ms_to_s(ms: float) -> float:
    return float(ms) / 1000.0


def segment_cycles(events: Sequence[GaitEvent], diagnostics: list[Diagnostic] | None = None) -> list[GaitCycle]:
    """One cycle per consecutive heel-strike pair that encloses a full quadruple.

    ``events`` belong to one foot and carry timestamps in milliseconds.
    """
    diags = diagnostics if diagnostics is not None else []
    evs = sorted(events, key=GaitEvent.sort_key)
    strikes = [i for i, e in enumerate(evs) if e.kind == HEEL_STRIKE]
    cycles: list[GaitCycle] = []
    for a, b in zip(strikes, strikes[1:]):
        inner = {e.kind: e for e in evs[a + 1:b]}
        hs, he = evs[a], evs[b]
        if not all(k in inner for k in (TOE_ON, HEEL_OFF, TOE_OFF)):
            diags.append(Diagnostic("IncompleteCycle", "cycle lacks toe on, heel off or toe off", hs.side, hs.idx))
            continue
        on, off, to = inner[TOE_ON], inner[HEEL_OFF], inner[TOE_OFF]
        try:
            cycles.append(GaitCycle(
                hs.side, hs.idx, on.idx, off.idx, to.idx, he.idx,
                _ms_to_s(hs.t), _ms_to_s(on.t), _ms_to_s(off.t), _ms_to_s(to.t), _ms_to_s(he.t),
            ))
        except ValueError as exc:
            diags.append(Diagnostic("IncompleteCycle", str(exc), hs.side, hs.idx))
    if strikes and strikes[-1] < len(evs) - 1:
        diags.append(Diagnostic("IncompleteCycle", "trailing events after the last heel strike discarded", evs[-1].side, evs[strikes[-1]].idx))
    return cycles


def _split_100(part: float, rest: float, whole: float) -> tuple[float, float]:
    # the larger share is computed directly and the smaller as its complement;
    # 100 - x is exact for x in [50, 100], so the two always sum to exactly 100
    if part >= rest:
        p = part / whole * 100.0
        return p, 100.0 - p
    r = rest / whole * 100.0
    return 100.0 - r, r


def stance_swing(c: GaitCycle) -> tuple[float, float]:
    """Stance and swing percentages of one cycle; they sum to exactly 100."""
    return _split_100(c.t_toeOff - c.t_hsStart, c.t_hsEnd - c.t_toeOff, c.GC)


def _overlap(a: tuple[float, float], b: tuple[float, float]) -> float:
    return max(0.0, min(a[1], b[1]) - max(a[0], b[0]))


def double_stance_cycle(ref: GaitCycle, other: Sequence[GaitCycle]) -> float:
    """Percent of ``ref`` during which both feet are in stance."""
    o = np.array([c.stance_interval for c in other], dtype=np.float64).reshape(-1, 2)
    return float(_both_loaded(ref, o[:, 0], o[:, 1]))


def _both_loaded(ref: GaitCycle, o0: np.ndarray, o1: np.ndarray) -> float:
    # own stance already lies inside the reference cycle
    lo = np.maximum(o0, ref.t_hsStart)
    hi = np.minimum(o1, ref.t_toeOff)
    return float(np.clip(hi - lo, 0.0, None).sum()) / ref.GC * 100.0


def double_stance(left: Sequence[GaitCycle], right: Sequence[GaitCycle],
                  diagnostics: list[Diagnostic] | None = None) -> list[float]:
    """Double-stance percent for every cycle of either foot whose span the
    other foot's cycles fully cover (so no overlapping stance is missed)."""
    diags = diagnostics if diagnostics is not None else []
    if not left or not right:
        raise NoBilateralOverlap("double stance needs cycles on both feet")
    if _overlap((left[0].t_hsStart, left[-1].t_hsEnd), (right[0].t_hsStart, right[-1].t_hsEnd)) <= 0:
        raise NoBilateralOverlap("left and right cycles do not overlap in time")
    out = []
    for ref, other in ((left, right), (right, left)):
        o = np.array([c.stance_interval for c in other], dtype=np.float64)
        lo, hi = other[0].t_hsStart, other[-1].t_hsEnd
        for c in ref:
            if c.t_hsStart < lo or c.t_hsEnd > hi:
                continue
            # only stances starting before the reference ends can overlap it
            k = int(np.searchsorted(o[:, 0], c.t_hsEnd))
            j = max(0, int(np.searchsorted(o[:, 0], c.t_hsStart)) - 1)
            out.append(_both_loaded(c, o[j:k, 0], o[j:k, 1]))
    if not out:
        diags.append(Diagnostic("NoBilateralOverlap", "no cycle is fully covered by the other foot", None, None))
        raise NoBilateralOverlap("no cycle is fully covered by the other foot")
    return out


@dataclass(frozen=True)
class StepTiming:
    step_left: tuple[float, ...]   # right strike minus preceding left strike
    step_right: tuple[float, ...]  # left strike minus preceding right strike
    STRT: float
    CAD: float


def step_stride_cadence(left_hs: Sequence[float], right_hs: Sequence[float]) -> StepTiming:
    """Step times, stride time and cadence from heel-strike times in seconds.

    Step times come from consecutive opposite-foot strikes so they are always
    positive; stride time is the sum of the mean step times; cadence counts
    the steps between the first and the last strike.
    """
    merged = sorted([(float(t), LEFT) for t in left_hs] + [(float(t), RIGHT) for t in right_hs])
    if len(merged) < 2:
        raise InsufficientEvents(f"cadence needs at least 2 heel strikes, got {len(merged)}")
    sl, sr = [], []
    for (t0, s0), (t1, s1) in zip(merged, merged[1:]):
        if s0 == LEFT and s1 == RIGHT:
            sl.append(t1 - t0)
        elif s0 == RIGHT and s1 == LEFT:
            sr.append(t1 - t0)
    if not sl or not sr:
        raise InsufficientEvents("step times need alternating left and right heel strikes")
    span = merged[-1][0] - merged[0][0]
    if not span > 0:
        raise InsufficientEvents("heel strikes span no time")
    strt = float(np.mean(sl)) + float(np.mean(sr))
    cad = 60.0 * (len(merged) - 1) / span
    return StepTiming(tuple(sl), tuple(sr), strt, cad)


@dataclass(frozen=True)
class TemporalReport:
    STP_left: Summary
    SWP_left: Summary
    STP_right: Summary
    SWP_right: Summary
    DSP: Summary
    STT_left: Summary
    STT_right: Summary
    STRT: Summary
    CAD: float
    cycles: dict = field(default_factory=dict, compare=False)

    def means(self) -> dict[str, float]:
        keys = ("STP_left", "SWP_left", "STP_right", "SWP_right", "DSP", "STT_left", "STT_right", "STRT")
        out = {k: getattr(self, k).mean for k in keys}
        out["CAD"] = self.CAD
        return out


def _phase_summaries(cycles: Sequence[GaitCycle]) -> tuple[Summary, Summary]:
    pairs = [stance_swing(c) for c in cycles]
    stp = Summary.of(p for p, _ in pairs)
    swp = Summary.of(s for _, s in pairs)
    if not pairs:
        return stp, swp
    # complementary means and identical spread, so mean STP + mean SWP = 100 exactly
    if stp.mean >= swp.mean:
        return stp, Summary(swp.values, 100.0 - stp.mean, stp.sd)
    return Summary(stp.values, 100.0 - swp.mean, swp.sd), swp


def temporal_report(left: Sequence[GaitCycle], right: Sequence[GaitCycle],
                    left_hs: Sequence[float], right_hs: Sequence[float],
                    diagnostics: list[Diagnostic] | None = None) -> TemporalReport:
    """All temporal parameters; heel-strike times in seconds.

    Stride time is summarized over the cycles of both feet, independently of
    the step times, so the step/stride identity is a real check.
    """
    stp_l, swp_l = _phase_summaries(left)
    stp_r, swp_r = _phase_summaries(right)
    dsp = Summary.of(double_stance(left, right, diagnostics))
    steps = step_stride_cadence(left_hs, right_hs)
    strt = Summary.of(c.GC for c in sorted([*left, *right], key=lambda c: (c.t_hsStart, c.side)))
    return TemporalReport(
        stp_l, swp_l, stp_r, swp_r, dsp,
        Summary.of(steps.step_left), Summary.of(steps.step_right), strt, steps.CAD,
        {LEFT: tuple(left), RIGHT: tuple(right)},
    )

"""Pressure aggregation and zero-velocity (foot-flat) detection.

Stance regions come from the smoothed whole-foot pressure sum; inside each
region the gyroscope X-axis (the pitch axis) decides where the foot settles
(toe on) and where it starts rolling off (heel off), using the variance of
first differences as a motion measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EmptyStream, InputError, LengthMismatch, WindowOutOfBounds
from .preprocess import PSUM_TAPS, gauss_smooth, pressure_sum_smooth
from .signal_model import Diagnostic, FootStream

FOREFOOT_CHANNELS = (2, 3, 4)
HINDFOOT_CHANNELS = (7, 8)


@dataclass(frozen=True, eq=False)
class PressureSums:
    P1: np.ndarray  # forefoot mean
    P2: np.ndarray  # hindfoot mean
    P: np.ndarray   # smoothed P1 + P2

    def scaled(self, c: float) -> "PressureSums":
        return PressureSums(self.P1 * c, self.P2 * c, self.P * c)


@dataclass(frozen=True, order=True)
class ZeroVelocityInterval:
    startIdx: int  # toe on
    endIdx: int    # heel off
    side: str = "L"

    def __post_init__(self):
        if not self.startIdx < self.endIdx:
            raise ValueError(f"zero-velocity interval needs start < end, got [{self.startIdx}, {self.endIdx}]")

    @property
    def mid(self) -> int:
        return (self.startIdx + self.endIdx) // 2


@dataclass(frozen=True)
class VarianceGateConfig:
    window: int = 10
    threshold1: float = 4.0  # heel-off gate, s^2 >= threshold1
    threshold2: float = 2.0  # toe-on gate, s^2 < threshold2
    stance_rel_threshold: float = 0.2

    def __post_init__(self):
        if self.window < 3:
            raise InputError(f"variance window must be >= 3 samples, got {self.window}")
        if self.threshold2 > self.threshold1:
            raise InputError("threshold2 (toe on) must not exceed threshold1 (heel off)")
        if not 0.0 < self.stance_rel_threshold < 1.0:
            raise InputError("stance_rel_threshold must lie in (0, 1)")


def pressure_sums_from_array(pressure, sigma: float = 5.0, taps: int = 7, psum_taps: int = PSUM_TAPS) -> PressureSums:
    pressure = np.asarray(pressure, dtype=np.float64)
    if pressure.ndim != 2 or len(pressure) == 0:
        raise EmptyStream("pressure sums need at least one frame")
    ch = lambda k: gauss_smooth(pressure[:, k - 1], sigma, taps)  # noqa: E731
    P1 = sum(ch(k) for k in FOREFOOT_CHANNELS) / len(FOREFOOT_CHANNELS)
    P2 = sum(ch(k) for k in HINDFOOT_CHANNELS) / len(HINDFOOT_CHANNELS)
    P = pressure_sum_smooth(P1 + P2, psum_taps)
    return PressureSums(P1, P2, P)


def pressure_sums(fs: FootStream, sigma: float = 5.0, taps: int = 7, psum_taps: int = PSUM_TAPS) -> PressureSums:
    """Forefoot (channels 2-4) and hindfoot (channels 7-8) means plus their smoothed sum."""
    if len(fs) == 0:
        raise EmptyStream(f"foot {fs.side} has no frames")
    return pressure_sums_from_array(fs.pressure, sigma, taps, psum_taps)


def diff_variance(gyro_x, start: int, n: int) -> float:
    """Population variance of first differences of ``gyro_x[start:start+n]``."""
    gyro_x = np.asarray(gyro_x, dtype=np.float64)
    if n < 3:
        raise WindowOutOfBounds(f"window needs n >= 3, got {n}")
    if start < 0 or start + n > len(gyro_x):
        raise WindowOutOfBounds(f"window [{start}, {start + n}) outside [0, {len(gyro_x)})")
    return float(np.var(np.diff(gyro_x[start:start + n])))


def diff_variance_series(gyro_x, n: int) -> np.ndarray:
    """``out[i] = diff_variance(gyro_x, i, n)`` for every in-bounds window."""
    gyro_x = np.asarray(gyro_x, dtype=np.float64)
    if n < 3:
        raise WindowOutOfBounds(f"window needs n >= 3, got {n}")
    if len(gyro_x) < n:
        return np.empty(0)
    d = np.diff(gyro_x)
    return sliding_window_view(d, n - 1).var(axis=1)


def stance_regions(P, rel_threshold: float = 0.2) -> tuple[list[tuple[int, int]], float]:
    """Half-open runs where P exceeds ``rel_threshold`` times its 95th percentile."""
    P = np.asarray(P, dtype=np.float64)
    if len(P) == 0:
        return [], 0.0
    level = rel_threshold * float(np.percentile(P, 95))
    if not level > 0:
        return [], level
    above = np.concatenate(([False], P > level, [False]))
    edges = np.flatnonzero(np.diff(above.astype(np.int8)))
    return list(zip(edges[0::2].tolist(), edges[1::2].tolist())), level


def detect_zero_velocity(
    sums: PressureSums,
    gyro_x,
    cfg: VarianceGateConfig = VarianceGateConfig(),
    side: str = "L",
    diagnostics: list[Diagnostic] | None = None,
) -> list[ZeroVelocityInterval]:
    """Foot-flat intervals, one per complete stance region.

    Toe on is the first sample on the rising edge of P whose leading variance
    window ``[i, i+n)`` is below ``threshold2``.  Heel off is the first sample
    on the falling edge whose trailing window ``[i-n+2, i+2)`` (newest
    difference ``a[i+1] - a[i]``) reaches ``threshold1``.
    """
    P = np.asarray(sums.P, dtype=np.float64)
    gyro_x = np.asarray(gyro_x, dtype=np.float64)
    if len(gyro_x) != len(P) or len(sums.P1) != len(P) or len(sums.P2) != len(P):
        raise LengthMismatch(f"pressure sums ({len(P)}) and gyro ({len(gyro_x)}) lengths differ")
    diags = diagnostics if diagnostics is not None else []
    n = cfg.window
    N = len(P)
    s2 = diff_variance_series(gyro_x, n)
    regions, _ = stance_regions(P, cfg.stance_rel_threshold)

    out: list[ZeroVelocityInterval] = []
    for a, b in regions:
        if a == 0 or b == N:
            diags.append(Diagnostic("PartialStance", "stance region touches the record boundary", side, a))
            continue
        seg = P[a:b]
        peak_first = a + int(np.argmax(seg))
        peak_last = b - 1 - int(np.argmax(seg[::-1]))

        toe_on = None
        hi = min(peak_first, N - n)
        if hi >= a:
            hits = np.flatnonzero(s2[a:hi + 1] < cfg.threshold2)
            if len(hits):
                toe_on = a + int(hits[0])
        heel_off = None
        lo = max(peak_last, n - 2)
        hi = min(b - 1, N - 2)
        if hi >= lo:
            hits = np.flatnonzero(s2[lo - n + 2:hi - n + 3] >= cfg.threshold1)
            if len(hits):
                heel_off = lo + int(hits[0])

        if toe_on is None or heel_off is None:
            missing = "toe on" if toe_on is None else "heel off"
            diags.append(Diagnostic("NoGateCrossing", f"no {missing} gate crossing in stance region", side, a))
            continue
        if not toe_on < heel_off:
            diags.append(Diagnostic("NoGateCrossing", "toe on not before heel off", side, a))
            continue
        out.append(ZeroVelocityInterval(toe_on, heel_off, side))
    return out


# --- threshold calibration ------------------------------------------------------

def _match_count(detected: Sequence[int], truth: Sequence[int], tol: int) -> int:
    used = set()
    hits = 0
    for t in truth:
        best = None
        for j, d in enumerate(detected):
            if j in used or abs(d - t) > tol:
                continue
            if best is None or abs(d - t) < abs(detected[best] - t):
                best = j
        if best is not None:
            used.add(best)
            hits += 1
    return hits


def gate_f1(
    cases: Iterable[tuple[PressureSums, np.ndarray, Sequence[ZeroVelocityInterval]]],
    cfg: VarianceGateConfig,
    tol: int = 2,
) -> float:
    """F1 of toe-on and heel-off indices against reference intervals."""
    tp = n_det = n_true = 0
    for sums, gyro_x, truth in cases:
        det = detect_zero_velocity(sums, gyro_x, cfg)
        for attr in ("startIdx", "endIdx"):
            d = [getattr(z, attr) for z in det]
            t = [getattr(z, attr) for z in truth]
            tp += _match_count(d, t, tol)
            n_det += len(d)
            n_true += len(t)
    if tp == 0:
        return 0.0
    precision, recall = tp / n_det, tp / n_true
    return 2 * precision * recall / (precision + recall)


def calibrate_gate(
    cases: Sequence[tuple[PressureSums, np.ndarray, Sequence[ZeroVelocityInterval]]],
    threshold1_grid: Iterable[float],
    threshold2_grid: Iterable[float],
    window: int = 10,
    stance_rel_threshold: float = 0.2,
) -> tuple[VarianceGateConfig, float]:
    """Grid-search the two variance gates for maximum event F1.

    Ties go to the first grid point, so pass grids in order of preference.
    """
    best_cfg, best_f1 = None, -1.0
    for t1, t2 in product(list(threshold1_grid), list(threshold2_grid)):
        if t2 > t1:
            continue
        cfg = VarianceGateConfig(window, t1, t2, stance_rel_threshold)
        f1 = gate_f1(cases, cfg)
        if f1 > best_f1:
            best_cfg, best_f1 = cfg, f1
    if best_cfg is None:
        raise InputError("empty calibration grid")
    return best_cfg, best_f1

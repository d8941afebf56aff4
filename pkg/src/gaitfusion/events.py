"""Heel-strike and toe-off detection around each zero-velocity interval.

Heel strike is the corner where the hindfoot curve P2 turns from flat to a
steep rise, shortly before the foot settles; toe off is the corner where the
forefoot curve P1 turns from a steep fall to flat, shortly after heel off.
Each corner is found by ranking every consecutive sample triple by its
turning angle and voting among the three sharpest with a proximity score
and left/right change scores.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateTriple, EmptyCandidates, NoCandidates
from .signal_model import Diagnostic
from .zv_detect import PressureSums, ZeroVelocityInterval

HEEL_STRIKE = "HeelStrike"
TOE_ON = "ToeOn"
HEEL_OFF = "HeelOff"
TOE_OFF = "ToeOff"
EVENT_KINDS = (HEEL_STRIKE, TOE_ON, HEEL_OFF, TOE_OFF)
PHASE_RANK = {k: i for i, k in enumerate(EVENT_KINDS)}


@dataclass(frozen=True)
class EventWindowConfig:
    before: int = 60     # samples on the far side of the zero-velocity boundary
    after: int = 6       # samples on the near side
    neighborhood: int = 10  # r: points summed on each side by the change scores


@dataclass(frozen=True)
class CandidatePoint:
    idx: int
    theta: float
    deltaC: float
    m: float = 0.0
    n: float = 0.0
    l: float = 0.0  # noqa: E741


@dataclass(frozen=True)
class GaitEvent:
    kind: str
    idx: int
    t: float  # ms
    side: str

    def sort_key(self):
        return (self.idx, PHASE_RANK[self.kind])


def candidate_window(
    zv: ZeroVelocityInterval,
    which: str,
    length: int,
    cfg: EventWindowConfig = EventWindowConfig(),
    diagnostics: list[Diagnostic] | None = None,
) -> tuple[int, int]:
    """Half-open sample range searched for ``which`` (HeelStrike or ToeOff)."""
    if which == HEEL_STRIKE:
        lo, hi = zv.startIdx - cfg.before, zv.startIdx + cfg.after
    elif which == TOE_OFF:
        lo, hi = zv.endIdx - cfg.after, zv.endIdx + cfg.before
    else:
        raise ValueError(f"candidate windows exist for HeelStrike and ToeOff, not {which!r}")
    clo, chi = max(0, lo), min(length, hi)
    if (clo, chi) != (lo, hi) and diagnostics is not None:
        diagnostics.append(Diagnostic("ClippedWindow", f"{which} window [{lo}, {hi}) clipped to [{clo}, {chi})", zv.side, zv.startIdx))
    return clo, chi


def delta_c(theta_deg):
    """Turning measure of a triple: positive below 180 degrees, negative above."""
    th = np.asarray(theta_deg, dtype=np.float64)
    c = np.cos(np.radians(np.abs(th - 180.0)))
    out = np.where(th < 180.0, 1.0 - c, c - 1.0)
    out = np.where(th == 180.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _theta(ax, ay, bx, by):
    # angle swept counterclockwise from the forward edge b to the backward edge a
    return np.degrees(np.arctan2(bx * ay - by * ax, bx * ax + by * ay)) % 360.0


def angle_delta_c(p_prev, p_mid, p_next, x_scale: float = 1.0, y_scale: float = 1.0) -> tuple[float, float]:
    """Interior angle at ``p_mid`` (degrees, measured above the curve) and its deltaC.

    Points are ``(index, value)``; both axes are divided by their scale first.
    """
    (i0, v0), (i1, v1), (i2, v2) = p_prev, p_mid, p_next
    if not i0 < i1 < i2:
        raise DegenerateTriple(f"indices must increase, got {i0}, {i1}, {i2}")
    ax, ay = (i0 - i1) / x_scale, (v0 - v1) / y_scale
    bx, by = (i2 - i1) / x_scale, (v2 - v1) / y_scale
    theta = float(_theta(ax, ay, bx, by))
    return theta, delta_c(theta)


def _turning_rows(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # theta and deltaC for every interior triple of each row, axes normalized per row
    mn = W.min(axis=1, keepdims=True)
    rng = W.max(axis=1, keepdims=True) - mn
    y = np.divide(W - mn, rng, out=np.zeros_like(W), where=rng > 0)
    dx = 1.0 / float(W.shape[1])
    theta = _theta(-dx, y[:, :-2] - y[:, 1:-1], dx, y[:, 2:] - y[:, 1:-1])
    return theta, delta_c(theta)


def _window_turning(curve, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray] | None:
    seg = np.asarray(curve[lo:hi], dtype=np.float64)
    if len(seg) < 3 or not float(seg.max() - seg.min()) > 0:
        return None
    theta, dc = _turning_rows(seg[None, :])
    return theta[0], dc[0]


def window_candidates(curve, lo: int, hi: int) -> list[CandidatePoint]:
    """Every interior triple of ``curve[lo:hi]`` with its angle and deltaC."""
    turning = _window_turning(curve, lo, hi)
    if turning is None:
        return []
    theta, dc = turning
    return [CandidatePoint(lo + 1 + k, float(theta[k]), float(dc[k])) for k in range(len(theta))]


def top_candidates(cands: Sequence[CandidatePoint], k: int = 3) -> list[CandidatePoint]:
    ranked = sorted(cands, key=lambda c: (-abs(c.deltaC), c.idx))
    return [c for c in ranked[:k] if c.deltaC != 0.0]


def _score_rows(curve: np.ndarray, cidx: np.ndarray, anchor: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scores m, n, l for candidate rows ``cidx`` (J, 3) against per-row anchors."""
    X = np.abs(cidx - anchor[:, None]).astype(np.float64)
    maxX = X.max(axis=1, keepdims=True)
    m = np.where(maxX > 0, -(np.divide(X, maxX, out=np.zeros_like(X), where=maxX > 0) * 100.0), 0.0)
    centre = curve[cidx][..., None]

    def change(offsets):
        j = cidx[..., None] + offsets
        ok = (j >= 0) & (j < len(curve))
        diff = np.abs(curve[np.clip(j, 0, len(curve) - 1)] - centre)
        S = np.where(ok, diff, 0.0).sum(axis=-1)
        top = S.max(axis=1, keepdims=True)
        return np.where(top > 0, np.divide(S, top, out=np.zeros_like(S), where=top > 0) * 100.0, 0.0)

    n = change(np.arange(-r, 0))
    l = change(np.arange(1, r + 1))  # noqa: E741
    return m, n, l


def score_candidates(
    cands: Sequence[CandidatePoint],
    zv_anchor: int,
    curve,
    r: int = 10,
    diagnostics: list[Diagnostic] | None = None,
) -> list[CandidatePoint]:
    """Attach proximity (m), left-change (n) and right-change (l) scores."""
    if not cands:
        raise EmptyCandidates("no candidates to score")
    if r < 1:
        raise ValueError("neighborhood r must be >= 1")
    cands = list(cands)
    if len(cands) < 3:
        if diagnostics is not None:
            diagnostics.append(Diagnostic("PaddedCandidates", f"only {len(cands)} candidate(s); padded by duplication", None, cands[0].idx))
        while len(cands) < 3:
            cands.append(cands[-1])
    curve = np.asarray(curve, dtype=np.float64)
    cidx = np.array([[c.idx for c in cands]])
    m, n, l = _score_rows(curve, cidx, np.array([zv_anchor]), r)  # noqa: E741
    return [replace(c, m=float(m[0, i]), n=float(n[0, i]), l=float(l[0, i])) for i, c in enumerate(cands)]


def _pick(scored: Sequence[CandidatePoint], total) -> CandidatePoint:
    return min(scored, key=lambda c: (-total(c), c.idx))


def _detect_rows(curve: np.ndarray, lo: np.ndarray, L: int, anchor: np.ndarray, which: str, r: int):
    """Best index per equal-length window ``[lo, lo + L)``, or -1 when none.

    Also returns how many real candidates each row had (padding happens below 3).
    """
    J = len(lo)
    if L < 3:
        return np.full(J, -1), np.zeros(J, dtype=int)
    W = curve[lo[:, None] + np.arange(L)]
    _, dc = _turning_rows(W)
    order = np.argsort(-np.abs(dc), axis=1, kind="stable")[:, :3]
    valid = np.take_along_axis(dc, order, axis=1) != 0.0
    k = valid.sum(axis=1)
    # pad short candidate lists by repeating the last real candidate
    pos = np.minimum(np.arange(order.shape[1])[None, :], np.maximum(k, 1)[:, None] - 1)
    order = np.take_along_axis(order, pos, axis=1)
    if order.shape[1] < 3:
        order = np.concatenate([order, np.repeat(order[:, -1:], 3 - order.shape[1], axis=1)], axis=1)
    cidx = lo[:, None] + 1 + order
    m, n, l = _score_rows(curve, cidx, anchor, r)  # noqa: E741
    total = m - n + l if which == HEEL_STRIKE else m + n - l
    best_total = total.max(axis=1, keepdims=True)
    big = np.iinfo(np.int64).max
    best = np.where(total == best_total, cidx, big).min(axis=1)
    return np.where(k > 0, best, -1), k


def _detect_many(curve, zvs: Sequence[ZeroVelocityInterval], which: str, t_ms, cfg: EventWindowConfig,
                 diagnostics: list[Diagnostic]) -> list[GaitEvent | None]:
    curve = np.asarray(curve, dtype=np.float64)
    windows = [candidate_window(zv, which, len(curve), cfg, diagnostics) for zv in zvs]
    anchors = np.array([zv.startIdx if which == HEEL_STRIKE else zv.endIdx for zv in zvs], dtype=np.int64)
    best = np.full(len(zvs), -1, dtype=np.int64)
    count = np.zeros(len(zvs), dtype=np.int64)
    lengths = np.array([hi - lo for lo, hi in windows], dtype=np.int64)
    los = np.array([lo for lo, _ in windows], dtype=np.int64)
    for L in np.unique(lengths):
        rows = np.flatnonzero(lengths == L)
        best[rows], count[rows] = _detect_rows(curve, los[rows], int(L), anchors[rows], which, cfg.neighborhood)
    out: list[GaitEvent | None] = []
    for zv, (lo, hi), b, k in zip(zvs, windows, best, count):
        if b < 0:
            diagnostics.append(Diagnostic("NoCandidates", f"no {which} candidates in window [{lo}, {hi})", zv.side, zv.startIdx))
            out.append(None)
            continue
        if k < 3:
            diagnostics.append(Diagnostic("PaddedCandidates", f"only {k} candidate(s); padded by duplication", zv.side, int(b)))
        t = float(t_ms[b]) if t_ms is not None else float(b)
        out.append(GaitEvent(which, int(b), t, zv.side))
    return out


def _detect(curve, zv, which, t_ms, cfg, diagnostics):
    diags = diagnostics if diagnostics is not None else []
    ev = _detect_many(curve, [zv], which, t_ms, cfg, diags)[0]
    if ev is None:
        raise NoCandidates(diags.pop().message)
    return ev


def detect_heel_strike(sums: PressureSums, zv: ZeroVelocityInterval, t_ms=None,
                       cfg: EventWindowConfig = EventWindowConfig(),
                       diagnostics: list[Diagnostic] | None = None) -> GaitEvent:
    """Heel strike from the hindfoot curve: argmax of m - n + l."""
    return _detect(sums.P2, zv, HEEL_STRIKE, t_ms, cfg, diagnostics)


def detect_toe_off(sums: PressureSums, zv: ZeroVelocityInterval, t_ms=None,
                   cfg: EventWindowConfig = EventWindowConfig(),
                   diagnostics: list[Diagnostic] | None = None) -> GaitEvent:
    """Toe off from the forefoot curve: argmax of m + n - l."""
    return _detect(sums.P1, zv, TOE_OFF, t_ms, cfg, diagnostics)


def assemble_events(
    zvs: Sequence[ZeroVelocityInterval],
    strikes: Sequence[GaitEvent | None],
    toe_offs: Sequence[GaitEvent | None],
    t_ms=None,
    diagnostics: list[Diagnostic] | None = None,
) -> list[GaitEvent]:
    """Per-stride event quadruples in phase order; bad strides are dropped."""
    diags = diagnostics if diagnostics is not None else []
    out: list[GaitEvent] = []
    last_toe_off = None
    for zv, hs, to in zip(zvs, strikes, toe_offs):
        if hs is None or to is None:
            diags.append(Diagnostic("MissingEvent", "heel strike or toe off not detected", zv.side, zv.startIdx))
            continue
        if not (hs.idx <= zv.startIdx < zv.endIdx <= to.idx):
            diags.append(Diagnostic("OrderViolation", f"HS {hs.idx} / ToeOn {zv.startIdx} / HeelOff {zv.endIdx} / TO {to.idx}", zv.side, zv.startIdx))
            continue
        if last_toe_off is not None and hs.idx <= last_toe_off:
            diags.append(Diagnostic("OrderViolation", f"heel strike {hs.idx} precedes previous toe off {last_toe_off}", zv.side, zv.startIdx))
            continue
        tt = (lambda i: float(t_ms[i])) if t_ms is not None else float
        out.extend([
            hs,
            GaitEvent(TOE_ON, zv.startIdx, tt(zv.startIdx), zv.side),
            GaitEvent(HEEL_OFF, zv.endIdx, tt(zv.endIdx), zv.side),
            to,
        ])
        last_toe_off = to.idx
    out.sort(key=GaitEvent.sort_key)
    return out


def detect_events(
    sums: PressureSums,
    zvs: Sequence[ZeroVelocityInterval],
    t_ms=None,
    cfg: EventWindowConfig = EventWindowConfig(),
    diagnostics: list[Diagnostic] | None = None,
) -> list[GaitEvent]:
    diags = diagnostics if diagnostics is not None else []
    strikes = _detect_many(sums.P2, zvs, HEEL_STRIKE, t_ms, cfg, diags)
    toe_offs = _detect_many(sums.P1, zvs, TOE_OFF, t_ms, cfg, diags)
    return assemble_events(zvs, strikes, toe_offs, t_ms, diags)

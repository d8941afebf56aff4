"""Sensor data model, CSV log format and session validation.

One log file carries both feet; each row is one 66 Hz sample of one foot::

    t_ms,foot,ax_g,ay_g,az_g,gx_dps,gy_dps,gz_dps,p1,p2,p3,p4,p5,p6,p7,p8

Accelerations are in g, angular rates in deg/s, and pressures are normalized
to [0, 1] per channel (channels 1-4 forefoot, 5-6 midfoot, 7-8 hindfoot).
Body axes: x lateral, y toward the walking direction, z up.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Literal, Mapping, Sequence

import numpy as np

from .errors import MalformedRow, NonMonotoneTime, OutOfRangeValue

Side = Literal["L", "R"]
LEFT: Side = "L"
RIGHT: Side = "R"
SIDES: tuple[Side, Side] = (LEFT, RIGHT)

NOMINAL_RATE_HZ = 66.0
N_PRESSURE = 8

CSV_COLUMNS = (
    "t_ms", "foot",
    "ax_g", "ay_g", "az_g",
    "gx_dps", "gy_dps", "gz_dps",
    "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8",
)
CSV_HEADER = ",".join(CSV_COLUMNS)

# gaps longer than this many nominal intervals are reported
GAP_INTERVALS = 3.0
RATE_TOLERANCE = 0.2
MIN_BILATERAL_OVERLAP_S = 1.0


@dataclass(frozen=True)
class SensorFrame:
    """One sample of one foot."""

    t: float
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]
    pressure: tuple[float, ...]


@dataclass(frozen=True)
class Diagnostic:
    """A non-fatal finding attached to a session, stride or stream.

    ``severity`` is ``"error"`` for type-invariant violations and
    ``"warning"`` for conditions downstream code can work around.
    """

    code: str
    message: str
    side: str | None = None
    index: int | None = None
    severity: str = "warning"

    def __str__(self) -> str:
        loc = []
        if self.side is not None:
            loc.append(f"foot {self.side}")
        if self.index is not None:
            loc.append(f"index {self.index}")
        where = f" at {', '.join(loc)}" if loc else ""
        return f"{self.code}{where}: {self.message}"


def _frozen(a, shape_tail: tuple[int, ...]) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.size == 0:
        arr = arr.reshape((0,) + shape_tail)
    if arr.shape[1:] != shape_tail:
        raise ValueError(f"expected shape (N, {', '.join(map(str, shape_tail))}), got {arr.shape}")
    arr.flags.writeable = False
    return arr


def infer_rate_hz(t_ms: np.ndarray) -> float:
    if len(t_ms) < 2:
        return NOMINAL_RATE_HZ
    med = float(np.median(np.diff(t_ms)))
    if not med > 0:
        return NOMINAL_RATE_HZ
    return 1000.0 / med


class FootStream:
    """All samples of one foot as read-only column arrays.

    The constructor does not validate; use :func:`validate_session` for
    diagnostics.  ``frames`` gives the per-sample :class:`SensorFrame` view.
    """

    __slots__ = ("side", "t_ms", "accel", "gyro", "pressure", "sample_rate_hz")

    def __init__(self, side: Side, t_ms, accel, gyro, pressure, sample_rate_hz: float | None = None):
        if side not in SIDES:
            raise ValueError(f"side must be 'L' or 'R', got {side!r}")
        t = np.array(t_ms, dtype=np.float64).reshape(-1)
        t.flags.writeable = False
        n = len(t)
        acc = _frozen(accel, (3,))
        gyr = _frozen(gyro, (3,))
        prs = _frozen(pressure, (N_PRESSURE,))
        if not (len(acc) == len(gyr) == len(prs) == n):
            raise ValueError("t_ms, accel, gyro and pressure must have the same length")
        object.__setattr__(self, "side", side)
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "accel", acc)
        object.__setattr__(self, "gyro", gyr)
        object.__setattr__(self, "pressure", prs)
        rate = infer_rate_hz(t) if sample_rate_hz is None else float(sample_rate_hz)
        object.__setattr__(self, "sample_rate_hz", rate)

    def __setattr__(self, name, value):
        raise AttributeError("FootStream is immutable")

    @classmethod
    def from_frames(cls, side: Side, frames: Sequence[SensorFrame], sample_rate_hz: float | None = None):
        return cls(
            side,
            [f.t for f in frames],
            [f.accel for f in frames],
            [f.gyro for f in frames],
            [f.pressure for f in frames],
            sample_rate_hz,
        )

    def replace(self, **arrays) -> "FootStream":
        rate = arrays.pop("sample_rate_hz", None)
        kw = {k: arrays.pop(k, getattr(self, k)) for k in ("t_ms", "accel", "gyro", "pressure")}
        if arrays:
            raise TypeError(f"unknown fields {sorted(arrays)}")
        return FootStream(self.side, sample_rate_hz=rate, **kw)

    def __len__(self) -> int:
        return len(self.t_ms)

    def frame(self, i: int) -> SensorFrame:
        return SensorFrame(
            float(self.t_ms[i]),
            tuple(float(v) for v in self.accel[i]),
            tuple(float(v) for v in self.gyro[i]),
            tuple(float(v) for v in self.pressure[i]),
        )

    @property
    def frames(self) -> tuple[SensorFrame, ...]:
        return tuple(self.frame(i) for i in range(len(self)))

    def __iter__(self) -> Iterator[SensorFrame]:
        return (self.frame(i) for i in range(len(self)))

    @property
    def t_s(self) -> np.ndarray:
        return self.t_ms / 1000.0

    def __eq__(self, other) -> bool:
        if not isinstance(other, FootStream):
            return NotImplemented
        return (
            self.side == other.side
            and np.array_equal(self.t_ms, other.t_ms)
            and np.array_equal(self.accel, other.accel)
            and np.array_equal(self.gyro, other.gyro)
            and np.array_equal(self.pressure, other.pressure)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"FootStream(side={self.side!r}, n={len(self)}, rate={self.sample_rate_hz:.3f} Hz)"


@dataclass(frozen=True, eq=False)
class GaitSession:
    left: FootStream
    right: FootStream
    meta: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    def foot(self, side: Side) -> FootStream:
        return self.left if side == LEFT else self.right

    def bilateral_overlap_s(self) -> float:
        if len(self.left) == 0 or len(self.right) == 0:
            return 0.0
        lo = max(self.left.t_ms[0], self.right.t_ms[0])
        hi = min(self.left.t_ms[-1], self.right.t_ms[-1])
        return max(0.0, (hi - lo) / 1000.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaitSession):
            return NotImplemented
        return self.left == other.left and self.right == other.right and dict(self.meta) == dict(other.meta)


# --- CSV ----------------------------------------------------------------------

def parse_row(line: str, lineno: int, adc_full_scale: float = 1.0) -> tuple[str, tuple[float, ...]]:
    """Parse one data row into ``(foot, (t_ms, ax..gz, p1..p8))``."""
    parts = line.split(",")
    if len(parts) != len(CSV_COLUMNS):
        raise MalformedRow(lineno, f"expected {len(CSV_COLUMNS)} columns, got {len(parts)}")
    foot = parts[1]
    if foot not in SIDES:
        raise MalformedRow(lineno, f"foot must be L or R, got {foot!r}")
    try:
        if "_" in line:
            raise ValueError("digit separators are not allowed")
        vals = [float(p) for p in parts[:1] + parts[2:]]
    except ValueError as exc:
        raise MalformedRow(lineno, str(exc)) from None
    if not all(map(math.isfinite, vals)):
        raise MalformedRow(lineno, "non-finite value")
    if adc_full_scale != 1.0:
        vals[7:] = [v / adc_full_scale for v in vals[7:]]
    for k, v in enumerate(vals[7:]):
        if not 0.0 <= v <= 1.0:
            raise OutOfRangeValue(lineno, f"p{k + 1}", v)
    return foot, tuple(vals)


def session_from_rows(rows: Iterable[tuple[str, tuple[float, ...], int]], meta=None) -> GaitSession:
    """Build a validated session from ``(foot, values, lineno)`` rows.

    Frames are sorted by timestamp per foot; a repeated timestamp raises
    :class:`NonMonotoneTime`.
    """
    per_foot: dict[str, list] = {LEFT: [], RIGHT: []}
    for foot, vals, lineno in rows:
        per_foot[foot].append((vals[0], lineno, vals))
    streams = {}
    for side in SIDES:
        recs = sorted(per_foot[side], key=lambda r: r[0])
        for i in range(1, len(recs)):
            if recs[i][0] <= recs[i - 1][0]:
                raise NonMonotoneTime(side, i, recs[i][1])
        arr = np.array([r[2] for r in recs], dtype=np.float64).reshape(-1, 15)
        streams[side] = FootStream(side, arr[:, 0], arr[:, 1:4], arr[:, 4:7], arr[:, 7:15])
    return GaitSession(streams[LEFT], streams[RIGHT], meta or {})


def iter_csv_rows(text: str, adc_full_scale: float = 1.0):
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != CSV_HEADER:
        raise MalformedRow(1, "missing or wrong header")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        foot, vals = parse_row(line, lineno, adc_full_scale)
        yield foot, vals, lineno


def _numeric_foot_codes(body: str) -> str | None:
    """``body`` with each row's foot field rewritten as 0 (L) or 1 (R).

    Numeric codes let loadtxt skip a per-row Python converter.  Returns
    ``None`` unless every non-empty row has a lone L or R in its second field
    and no other L or R appears anywhere.
    """
    buf = np.frombuffer(body.encode("utf-8"), dtype=np.uint8).copy()
    nl = np.flatnonzero(buf == ord("\n"))
    starts = np.concatenate([[0], nl + 1])
    ends = np.concatenate([nl, [len(buf)]])
    keep = starts < ends
    starts, ends = starts[keep], ends[keep]
    commas = np.flatnonzero(buf == ord(","))
    j = np.searchsorted(commas, starts)
    if len(starts) == 0 or (j >= len(commas)).any():
        return None
    foot = commas[j] + 1
    if (foot + 1 >= ends).any():
        return None
    is_l, is_r = buf[foot] == ord("L"), buf[foot] == ord("R")
    if not (is_l | is_r).all() or (buf[foot + 1] != ord(",")).any():
        return None
    if np.count_nonzero((buf == ord("L")) | (buf == ord("R"))) != len(foot):
        return None
    buf[foot] = np.where(is_r, ord("1"), ord("0"))
    return buf.tobytes().decode("ascii")


def _fast_session(body: str, adc_full_scale: float) -> GaitSession | None:
    """Vectorized parse of well-formed data rows; ``None`` means "use the row parser".

    The row parser is the reference: anything unusual falls back to it so
    errors always name the offending line.
    """
    if "_" in body or "\r" in body:
        return None
    codes = _numeric_foot_codes(body)
    if codes is None:
        return None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            arr = np.loadtxt(io.StringIO(codes), delimiter=",", dtype=np.float64, comments=None, ndmin=2)
    except (ValueError, KeyError):
        return None
    if arr.shape[0] == 0 or arr.shape[1] != len(CSV_COLUMNS) or not np.isfinite(arr).all():
        return None
    if adc_full_scale != 1.0:
        arr[:, 8:] /= adc_full_scale
    if not ((arr[:, 8:] >= 0.0) & (arr[:, 8:] <= 1.0)).all():
        return None
    streams = {}
    for code, side in enumerate(SIDES):
        rows = arr[arr[:, 1] == code]
        rows = rows[np.argsort(rows[:, 0], kind="stable")]
        if len(rows) > 1 and not (np.diff(rows[:, 0]) > 0).all():
            return None
        streams[side] = FootStream(side, rows[:, 0], rows[:, 2:5], rows[:, 5:8], rows[:, 8:16])
    return GaitSession(streams[LEFT], streams[RIGHT], {})


def parse_log(data: bytes | str, format: str = "csv", adc_full_scale: float = 1.0) -> GaitSession:
    """Parse a two-foot CSV log into a :class:`GaitSession`.

    ``adc_full_scale`` maps raw pressure readings onto [0, 1]; logs written by
    :func:`serialize_log` are already normalized.
    """
    if format != "csv":
        raise ValueError(f"unsupported log format {format!r}")
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    header, _, body = text.partition("\n")
    if header.rstrip("\r") == CSV_HEADER:
        fast = _fast_session(body, adc_full_scale)
        if fast is not None:
            return fast
    return session_from_rows(iter_csv_rows(text, adc_full_scale))


def format_float(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    if s in ("-0", ""):
        s = "0"
    return s


def format_row(side: str, t_ms: float, accel, gyro, pressure) -> str:
    nums = [t_ms, *accel, *gyro, *pressure]
    out = [format_float(float(nums[0])), side]
    out.extend(format_float(float(v)) for v in nums[1:])
    return ",".join(out)


def iter_log_lines(session: GaitSession) -> Iterator[str]:
    """Rows of both feet merged in time order (left first on ties)."""
    order = []
    for side in SIDES:
        fs = session.foot(side)
        order.extend((float(fs.t_ms[i]), 0 if side == LEFT else 1, i) for i in range(len(fs)))
    order.sort()
    for _, s, i in order:
        fs = session.left if s == 0 else session.right
        yield format_row(fs.side, fs.t_ms[i], fs.accel[i], fs.gyro[i], fs.pressure[i])


def serialize_log(session: GaitSession) -> bytes:
    body = "\n".join([CSV_HEADER, *iter_log_lines(session)])
    return (body + "\n").encode("utf-8")


def quantize(x) -> np.ndarray:
    """Round to the 6 fractional digits the log format preserves."""
    return np.rint(np.asarray(x, dtype=np.float64) * 1e6) / 1e6


# --- validation -----------------------------------------------------------------

def _validate_stream(fs: FootStream) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    side = fs.side
    if len(fs) == 0:
        return [Diagnostic("EmptyStream", "no frames", side)]
    for name in ("t_ms", "accel", "gyro", "pressure"):
        arr = getattr(fs, name)
        bad = ~np.isfinite(arr)
        if bad.any():
            i = int(np.argwhere(bad)[0][0])
            out.append(Diagnostic("NonFinite", f"{name} contains NaN/Inf", side, i, "error"))
    p = fs.pressure
    bad = (p < 0.0) | (p > 1.0)
    if bad.any():
        i = int(np.argwhere(bad)[0][0])
        out.append(Diagnostic("OutOfRangeValue", "pressure outside [0, 1]", side, i, "error"))
    if len(fs) >= 2:
        dt = np.diff(fs.t_ms)
        for i in np.flatnonzero(~(dt > 0)):
            out.append(Diagnostic("NonMonotoneTime", "timestamp not strictly increasing", side, int(i) + 1, "error"))
        nominal = 1000.0 / fs.sample_rate_hz
        pos = dt[dt > 0]
        if len(pos):
            med = float(np.median(dt))
            if not abs(med - nominal) <= RATE_TOLERANCE * nominal:
                out.append(Diagnostic(
                    "RateMismatch",
                    f"median interval {med:.3f} ms vs nominal {nominal:.3f} ms",
                    side, None, "error",
                ))
        for i in np.flatnonzero(dt > GAP_INTERVALS * nominal):
            out.append(Diagnostic("SampleGap", f"gap of {dt[i]:.1f} ms", side, int(i) + 1))
    return out


def validate_session(s: GaitSession) -> list[Diagnostic]:
    """Return every invariant violation found in ``s`` (empty when clean)."""
    out = _validate_stream(s.left) + _validate_stream(s.right)
    if len(s.left) and len(s.right) and s.bilateral_overlap_s() < MIN_BILATERAL_OVERLAP_S:
        out.append(Diagnostic(
            "NoBilateralOverlap",
            f"left/right overlap {s.bilateral_overlap_s():.3f} s < {MIN_BILATERAL_OVERLAP_S} s",
        ))
    return out


def contiguous_segments(fs: FootStream) -> list[tuple[int, int]]:
    """Half-open index ranges separated by gaps longer than 3 nominal intervals."""
    n = len(fs)
    if n == 0:
        return []
    dt = np.diff(fs.t_ms)
    cuts = np.flatnonzero(dt > GAP_INTERVALS * 1000.0 / fs.sample_rate_hz) + 1
    bounds = [0, *cuts.tolist(), n]
    return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

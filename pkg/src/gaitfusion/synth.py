"""Synthetic two-foot gait sessions with exact ground truth.

Each foot follows a strictly periodic cycle laid out from heel strike::

    HS --load--> ToeOn --flat--> HeelOff --push--> ToeOff --swing--> HS

The sensor stays put during stance while the foot pitches about it (heel
rocker during load, toe rocker during push); during swing it travels one
stride forward along a minimum-jerk path with a bell-shaped clearance lift.
Position, pitch and their derivatives are closed-form, so the body-frame
specific force and angular rate are exact and double integration of the
clean signals has a known answer.

Pressure channels are trapezoids keyed to the events: the hindfoot starts
loading exactly at heel strike and the forefoot finishes unloading exactly at
toe off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import DurationTooShort, InputError
from .events import HEEL_OFF, HEEL_STRIKE, TOE_OFF, TOE_ON, GaitEvent
from .signal_model import LEFT, NOMINAL_RATE_HZ, RIGHT, SIDES, FootStream, GaitSession, quantize
from .zv_detect import ZeroVelocityInterval

GRAVITY = 9.80665

# per-channel plateau amplitude, channels 1..8
CHANNEL_AMPLITUDE = (0.50, 0.65, 0.70, 0.60, 0.30, 0.35, 0.80, 0.75)


@dataclass(frozen=True)
class GaitProfile:
    name: str = "normal"
    stride_time_s: float = 1.0
    stance_percent: float = 60.0        # mean of both feet
    stride_length_cm: float = 120.0
    asymmetry: float = 1.0              # left / right stance ratio
    step_phase: float = 0.5             # right heel strike, as fraction of the left cycle
    load_fraction: float = 0.17         # heel strike -> toe on, fraction of stance
    push_fraction: float = 0.25         # heel off -> toe off, fraction of stance
    heel_pitch_deg: float = 20.0        # toe-up pitch at heel strike
    toe_pitch_deg: float = 35.0         # toe-down pitch at toe off
    clearance_m: float = 0.06
    pressure_edge_s: float = 0.18       # heel-strike rise and toe-off fall duration
    accel_noise_g: float = 0.005
    gyro_noise_dps: float = 0.3
    pressure_noise: float = 0.005       # relative to load
    accel_bias_g: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gyro_bias_dps: tuple[float, float, float] = (0.0, 0.0, 0.0)
    start_offset_s: float = 0.3         # first left heel strike
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.stance_percent < 100.0:
            raise InputError("stance_percent must lie in (0, 100)")
        if self.stride_length_cm < 0:
            raise InputError("stride_length_cm must be >= 0")
        if self.stride_time_s <= 0:
            raise InputError("stride_time_s must be positive")
        if min(self.accel_noise_g, self.gyro_noise_dps, self.pressure_noise) < 0:
            raise InputError("noise levels must be >= 0")
        if self.asymmetry <= 0:
            raise InputError("asymmetry must be positive")
        sl, sr = self.stance_left_percent, self.stance_right_percent
        if not (sl < 100 and sr < 100):
            raise InputError("per-foot stance must stay below 100%")
        phi = 100.0 * self.step_phase
        # walking: both double-support periods must exist
        if not (sl > phi and phi + sr > 100.0):
            raise InputError("profile has a flight phase; step_phase incompatible with stance")
        if self.load_fraction + self.push_fraction >= 1.0:
            raise InputError("load + push must leave a foot-flat phase")
        if self.pressure_edge_s <= 0:
            raise InputError("pressure_edge_s must be positive")
        for s in (sl, sr):
            stance = s / 100.0 * self.stride_time_s
            if 2.0 * self.pressure_edge_s >= stance:
                raise InputError("pressure edges must be shorter than half the stance phase")

    @property
    def stance_left_percent(self) -> float:
        return 2.0 * self.stance_percent * self.asymmetry / (1.0 + self.asymmetry)

    @property
    def stance_right_percent(self) -> float:
        return 2.0 * self.stance_percent / (1.0 + self.asymmetry)

    @property
    def double_stance_percent(self) -> float:
        # with no flight phase the two stance phases cover the cycle once plus their overlap
        return self.stance_left_percent + self.stance_right_percent - 100.0

    def stance_percent_of(self, side: str) -> float:
        return self.stance_left_percent if side == LEFT else self.stance_right_percent

    def noiseless(self) -> "GaitProfile":
        return replace(self, accel_noise_g=0.0, gyro_noise_dps=0.0, pressure_noise=0.0,
                       accel_bias_g=(0.0, 0.0, 0.0), gyro_bias_dps=(0.0, 0.0, 0.0))


def normal_profile(**kw) -> GaitProfile:
    return replace(GaitProfile(), **kw)


def stroke_profile(side: str = LEFT, **kw) -> GaitProfile:
    """Slow hemiparetic-like gait: long stance, short stride, left/right asymmetry.

    ``stroke-left`` lengthens the left stance and the left step.
    """
    left = side == LEFT
    base = GaitProfile(
        name="stroke-left" if left else "stroke-right",
        stride_time_s=2.2,
        stance_percent=80.0,
        stride_length_cm=48.5,
        asymmetry=1.05 if left else 1 / 1.05,
        step_phase=0.53 if left else 0.47,
        heel_pitch_deg=10.0,
        toe_pitch_deg=25.0,
        clearance_m=0.04,
    )
    return replace(base, **kw)


PROFILES = {
    "normal": normal_profile,
    "stroke-left": lambda **kw: stroke_profile(LEFT, **kw),
    "stroke-right": lambda **kw: stroke_profile(RIGHT, **kw),
}


def profile_by_name(name: str, **kw) -> GaitProfile:
    try:
        return PROFILES[name](**kw)
    except KeyError:
        raise InputError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


@dataclass(frozen=True)
class StanceTimes:
    hs: float
    toe_on: float
    heel_off: float
    toe_off: float


@dataclass
class GroundTruth:
    profile: GaitProfile
    sample_rate_hz: float
    duration_s: float
    events: Mapping[str, list[GaitEvent]]                 # per side, inside the record
    zero_velocity: Mapping[str, list[ZeroVelocityInterval]]
    stances: Mapping[str, list[StanceTimes]]              # every stance touching the record, seconds
    stride_lengths_cm: Mapping[str, list[float]]          # between consecutive in-record stances
    params: Mapping[str, float] = field(default_factory=dict)

    def event_indices(self, side: str, kind: str) -> list[int]:
        return [e.idx for e in self.events[side] if e.kind == kind]

    def complete_stances(self, side: str) -> list[StanceTimes]:
        """Stances whose heel strike and toe off both fall inside the record."""
        return [s for s in self.stances[side] if s.hs >= 0.0 and s.toe_off < self.duration_s]

    def to_dict(self) -> dict:
        return {
            "profile": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.profile.__dict__.items()},
            "sample_rate_hz": self.sample_rate_hz,
            "duration_s": self.duration_s,
            "parameters": dict(self.params),
            "events": {
                side: [[e.kind, e.idx, round(e.t, 6)] for e in self.events[side]] for side in SIDES
            },
            "zero_velocity": {
                side: [[z.startIdx, z.endIdx] for z in self.zero_velocity[side]] for side in SIDES
            },
            "stride_lengths_cm": {side: list(self.stride_lengths_cm[side]) for side in SIDES},
        }


def true_parameters(profile: GaitProfile) -> dict[str, float]:
    gc = profile.stride_time_s
    sl, sr = profile.stance_left_percent, profile.stance_right_percent
    return {
        "stance_left_pct": sl,
        "swing_left_pct": 100.0 - sl,
        "stance_right_pct": sr,
        "swing_right_pct": 100.0 - sr,
        "double_stance_pct": sl + sr - 100.0,
        "step_time_left_s": profile.step_phase * gc,
        "step_time_right_s": (1.0 - profile.step_phase) * gc,
        "stride_time_s": gc,
        "cadence_spm": 120.0 / gc,
        "stride_length_cm": profile.stride_length_cm,
        "velocity_kmh": 3.6 / 100.0 * profile.stride_length_cm / gc,
    }


# --- closed-form motion -----------------------------------------------------------

def _smoothstep(v):
    return v * v * (3.0 - 2.0 * v), 6.0 * v * (1.0 - v)


def _minjerk(v):
    q = v ** 3 * (10.0 - 15.0 * v + 6.0 * v * v)
    dq = 30.0 * v * v * (1.0 - v) ** 2
    ddq = 60.0 * v - 180.0 * v * v + 120.0 * v ** 3
    return q, dq, ddq


def _lift_acc(v):
    # d2/dv2 of 64 v^3 (1 - v)^3
    return 64.0 * (6.0 * v - 36.0 * v ** 2 + 60.0 * v ** 3 - 30.0 * v ** 4)


def _ramp(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _soft_ramp(x):
    # seventh-order smoothstep: first three derivatives vanish at both ends
    x = np.clip(x, 0.0, 1.0)
    return x ** 4 * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x ** 3)


def _trapezoid(t, t0, t1, t2, t3, rise=_ramp, fall=_ramp):
    """Smoothed trapezoid with edges over [t0, t1] and [t2, t3]."""
    return np.minimum(rise((t - t0) / (t1 - t0)), fall((t3 - t) / (t3 - t2)))


def _foot_phase_times(profile: GaitProfile, side: str):
    gc = profile.stride_time_s
    stance = profile.stance_percent_of(side) / 100.0 * gc
    load = profile.load_fraction * stance
    push = profile.push_fraction * stance
    first_hs = profile.start_offset_s + (0.0 if side == LEFT else profile.step_phase * gc)
    return gc, stance, load, push, first_hs


def _foot_signals(profile: GaitProfile, side: str, t: np.ndarray):
    """Body-frame specific force (g), angular rate (deg/s) and pressure for one foot."""
    gc, stance, load, push, first_hs = _foot_phase_times(profile, side)
    swing = gc - stance
    k = np.floor((t - first_hs) / gc)
    u = t - (first_hs + k * gc)  # seconds since this cycle's heel strike

    th0 = math.radians(profile.heel_pitch_deg)
    thp = math.radians(profile.toe_pitch_deg)
    pitch = np.zeros_like(t)
    rate = np.zeros_like(t)
    a_fwd = np.zeros_like(t)
    a_up = np.zeros_like(t)

    m = u < load
    v = u[m] / load
    s, ds = _smoothstep(v)
    pitch[m] = th0 * (1.0 - s)
    rate[m] = -th0 * ds / load

    m = (u >= stance - push) & (u < stance)
    v = (u[m] - (stance - push)) / push
    s, ds = _smoothstep(v)
    pitch[m] = -thp * s
    rate[m] = -thp * ds / push

    m = u >= stance
    v = (u[m] - stance) / swing
    q, dq, ddq = _minjerk(v)
    pitch[m] = -thp + (thp + th0) * q
    rate[m] = (thp + th0) * dq / swing
    a_fwd[m] = profile.stride_length_cm / 100.0 * ddq / swing ** 2
    a_up[m] = profile.clearance_m * _lift_acc(v) / swing ** 2

    c, sn = np.cos(pitch), np.sin(pitch)
    az = a_up + GRAVITY
    accel = np.column_stack([np.zeros_like(t), c * a_fwd + sn * az, -sn * a_fwd + c * az]) / GRAVITY
    gyro = np.column_stack([np.degrees(rate), np.zeros_like(t), np.zeros_like(t)])

    # the hindfoot starts loading exactly at heel strike and the forefoot
    # finishes unloading exactly at toe off, both with very soft edges; the
    # other edges are slower so the event corners dominate their windows
    e = profile.pressure_edge_s
    toe_on, heel_off = load, stance - push
    flat = heel_off - toe_on
    unit = np.empty((len(t), 8))
    unit[:, 0] = _trapezoid(u, heel_off - 0.5 * flat, heel_off, stance - e, stance, fall=_soft_ramp)  # hallux
    fore = _trapezoid(u, 0.3 * load, toe_on + 0.5 * flat, stance - e, stance, fall=_soft_ramp)
    unit[:, 1] = unit[:, 2] = unit[:, 3] = fore
    mid = _trapezoid(u, 0.3 * load, toe_on + 0.5 * flat, heel_off, heel_off + 0.5 * push)
    unit[:, 4] = unit[:, 5] = mid
    hind = _trapezoid(u, 0.0, e, heel_off - 0.3 * flat, heel_off + 0.6 * push, rise=_soft_ramp)
    unit[:, 6] = unit[:, 7] = hind
    pressure = unit * np.asarray(CHANNEL_AMPLITUDE)
    return accel, gyro, pressure


def _foot_stances(profile: GaitProfile, side: str, duration: float) -> list[StanceTimes]:
    gc, stance, load, push, first_hs = _foot_phase_times(profile, side)
    k0 = math.floor((0.0 - first_hs) / gc) - 1
    k1 = math.ceil((duration - first_hs) / gc) + 1
    out = []
    for k in range(k0, k1 + 1):
        hs = first_hs + k * gc
        st = StanceTimes(hs, hs + load, hs + stance - push, hs + stance)
        if st.toe_off > 0.0 and st.hs < duration:
            out.append(st)
    return out


def generate(profile: GaitProfile, duration: float, sample_rate_hz: float = NOMINAL_RATE_HZ) -> tuple[GaitSession, GroundTruth]:
    """Synthesize a two-foot session and its ground truth.

    Output is bit-identical for identical arguments (noise is drawn from
    ``numpy.random.default_rng`` seeded by the profile seed and foot).
    """
    if duration < 2.0 * profile.stride_time_s:
        raise DurationTooShort(f"duration {duration} s is shorter than two strides ({2 * profile.stride_time_s} s)")
    n = int(math.floor(duration * sample_rate_hz + 1e-9))
    idx = np.arange(n)
    t = idx / sample_rate_hz
    t_ms = quantize(idx * (1000.0 / sample_rate_hz))

    streams = {}
    for fi, side in enumerate(SIDES):
        accel, gyro, pressure = _foot_signals(profile, side, t)
        rng = np.random.default_rng([profile.seed, fi])
        accel = accel + np.asarray(profile.accel_bias_g) + rng.normal(0.0, 1.0, accel.shape) * profile.accel_noise_g
        gyro = gyro + np.asarray(profile.gyro_bias_dps) + rng.normal(0.0, 1.0, gyro.shape) * profile.gyro_noise_dps
        # force-sensor noise scales with load; an unloaded sensor reads zero
        pressure = np.clip(pressure * (1.0 + rng.normal(0.0, 1.0, pressure.shape) * profile.pressure_noise), 0.0, 1.0)
        streams[side] = FootStream(side, t_ms, quantize(accel), quantize(gyro), quantize(pressure), sample_rate_hz)

    session = GaitSession(streams[LEFT], streams[RIGHT], {"profile": profile.name, "seed": str(profile.seed)})

    to_idx = lambda ts: int(round(ts * sample_rate_hz))  # noqa: E731
    events, zvs, stances, lengths = {}, {}, {}, {}
    for side in SIDES:
        st = _foot_stances(profile, side, duration)
        stances[side] = st
        evs = []
        for s in st:
            for kind, ts in ((HEEL_STRIKE, s.hs), (TOE_ON, s.toe_on), (HEEL_OFF, s.heel_off), (TOE_OFF, s.toe_off)):
                if 0.0 <= ts and to_idx(ts) < n:
                    evs.append(GaitEvent(kind, to_idx(ts), ts * 1000.0, side))
        events[side] = evs
        zvs[side] = [
            ZeroVelocityInterval(to_idx(s.toe_on), to_idx(s.heel_off), side)
            for s in st if s.toe_on >= 0.0 and to_idx(s.heel_off) < n
        ]
        k = len(zvs[side])
        lengths[side] = [profile.stride_length_cm] * max(0, k - 1)

    truth = GroundTruth(profile, sample_rate_hz, n / sample_rate_hz, events, zvs, stances, lengths, true_parameters(profile))
    return session, truth

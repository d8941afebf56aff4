"""Stride length and walking speed by strapdown integration with zero-velocity updates.

Orientation is propagated from the gyroscope and its tilt is re-initialized
from the measured gravity direction at every foot-flat interval.  Specific
force is rotated into the world frame, gravity is removed, and each stride
(anchor midpoint to anchor midpoint) is integrated twice with the residual
end velocity removed linearly across the stride.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import InsufficientAnchors, LengthMismatch, NoAnchors, ZeroDuration
from .signal_model import Diagnostic
from .zv_detect import ZeroVelocityInterval

GRAVITY_MPS2 = 9.80665
ZVU_RESIDUAL_TOL_MPS = 0.02


def _qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Hamilton product of scalar-last quaternion arrays
    ax, ay, az, aw = np.moveaxis(a, -1, 0)
    bx, by, bz, bw = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ], axis=-1)


def _prefix_product(q: np.ndarray) -> np.ndarray:
    """``out[k] = q[0] * q[1] * ... * q[k]`` by log-depth doubling."""
    n = len(q)
    shift = 1
    while shift < n:
        q = np.concatenate([q[:shift], _qmul(q[:n - shift], q[shift:])])
        shift *= 2
    return q


def _qinv(q: np.ndarray) -> np.ndarray:
    return q * np.array([-1.0, -1.0, -1.0, 1.0])


def _qmul1(a, b) -> tuple[float, float, float, float]:
    # one Hamilton product on plain floats; far cheaper than numpy for single quaternions
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def _tilt_quats(accel_mean: np.ndarray) -> np.ndarray:
    """Y(pitch) X(roll) for each row, the level-attitude part of the anchor orientation."""
    ax, ay, az = accel_mean.T
    roll = np.arctan2(ay, az)
    pitch = np.arctan2(-ax, np.hypot(ay, az))
    zero = np.zeros_like(roll)
    qx = np.stack([np.sin(roll / 2), zero, zero, np.cos(roll / 2)], axis=-1)
    qy = np.stack([zero, np.sin(pitch / 2), zero, np.cos(pitch / 2)], axis=-1)
    return _qmul(qy, qx)


def _yaw(q) -> float:
    x, y, z, w = q
    return math.atan2(2.0 * (x * y + w * z), 1.0 - 2.0 * (y * y + z * z))


def estimate_orientation(
    gyro_dps,
    accel_g,
    zvs: Sequence[ZeroVelocityInterval],
    t_s,
    initial_yaw_deg: float = 0.0,
) -> Rotation:
    """Body-to-world orientation for every sample.

    Inside each zero-velocity interval the orientation is the tilt implied by
    the mean accelerometer reading, with heading carried over from the gyro
    propagation that arrives there.  Outside, it follows the gyro from the
    nearest preceding interval (or back from the first one).
    """
    gyro = np.radians(np.asarray(gyro_dps, dtype=np.float64))
    accel = np.asarray(accel_g, dtype=np.float64)
    t = np.asarray(t_s, dtype=np.float64)
    n = len(t)
    if gyro.shape != (n, 3) or accel.shape != (n, 3):
        raise LengthMismatch(f"gyro {gyro.shape}, accel {accel.shape} and time ({n}) disagree")
    if not zvs:
        raise NoAnchors("orientation needs at least one zero-velocity interval")
    zvs = sorted(zvs)

    # body-frame increment between samples k-1 and k: mean rate times step
    rotvec = np.zeros((n, 3))
    if n > 1:
        rotvec[1:] = 0.5 * (gyro[1:] + gyro[:-1]) * np.diff(t)[:, None]
    P = _prefix_product(Rotation.from_rotvec(rotvec).as_quat())

    starts = np.array([z.startIdx for z in zvs])
    ends = np.minimum([z.endIdx for z in zvs], n - 1)
    csum = np.concatenate([np.zeros((1, 3)), np.cumsum(accel, axis=0)])
    means = (csum[ends + 1] - csum[starts]) / (ends - starts + 1)[:, None]
    level = _tilt_quats(means).tolist()
    Ps, Pe = P[starts].tolist(), _qinv(P[ends]).tolist()

    # q[k] = C[seg[k]] * P[k] off the anchors, where C = anchor * P[anchor end]^-1;
    # only the heading is carried from one anchor to the next, so this loop is sequential
    anchors = []
    consts = []
    yaw = math.radians(initial_yaw_deg)
    for i in range(len(zvs)):
        if consts:
            yaw = _yaw(_qmul1(consts[-1], Ps[i]))
        A = _qmul1((0.0, 0.0, math.sin(yaw / 2), math.cos(yaw / 2)), level[i])
        if not consts:
            consts.append(_qmul1(A, _qinv(np.asarray(Ps[i])).tolist()))
        anchors.append(A)
        consts.append(_qmul1(A, Pe[i]))

    # sample k follows the constant of the last anchor ending before it (0 before the first)
    seg = np.searchsorted(ends, np.arange(n), side="left")
    fixed = np.full(n, -1, dtype=np.int64)
    for i in range(len(zvs)):
        fixed[starts[i]:ends[i] + 1] = i
    quats = _qmul(np.asarray(consts)[seg], P)
    on = fixed >= 0
    quats[on] = np.asarray(anchors)[fixed[on]]
    return Rotation.from_quat(quats)


@dataclass(frozen=True, eq=False)
class StrideTrajectory:
    stride: int
    startIdx: int      # anchor midpoint where the stride starts
    endIdx: int        # next anchor midpoint
    duration_s: float
    velocity: np.ndarray   # (k, 3) m/s, world frame, after correction
    position: np.ndarray   # (k, 3) m, relative to the start anchor
    strideLength: float    # cm, horizontal displacement
    residual_mps: float    # end-anchor velocity removed by the correction
    zv_speed_mps: float    # largest corrected speed inside the bounding foot-flat intervals


def world_acceleration(accel_g, orientation: Rotation, gravity: float = GRAVITY_MPS2) -> np.ndarray:
    """Rotate specific force into the world frame and remove gravity (m/s^2)."""
    a = orientation.apply(np.asarray(accel_g, dtype=np.float64) * gravity)
    a[:, 2] -= gravity
    return a


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t)[:, None], axis=0, out=out[1:])
    return out


def integrate_stride(a_world: np.ndarray, t: np.ndarray, correct: bool = True) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Velocity and position over one stride starting at rest; returns (v, p, residual)."""
    v = _cumtrapz(a_world, t)
    residual = v[-1].copy()
    if correct:
        frac = (t - t[0]) / (t[-1] - t[0])
        v = v - frac[:, None] * residual
    p = _cumtrapz(v, t)
    return v, p, residual


def zvu_integrate(
    accel_g,
    orientation: Rotation,
    zvs: Sequence[ZeroVelocityInterval],
    t_s,
    gravity: float = GRAVITY_MPS2,
    residual_tol: float = ZVU_RESIDUAL_TOL_MPS,
    diagnostics: list[Diagnostic] | None = None,
) -> list[StrideTrajectory]:
    """One trajectory per pair of consecutive zero-velocity anchors."""
    zvs = sorted(zvs)
    if len(zvs) < 2:
        raise InsufficientAnchors(f"stride integration needs 2 zero-velocity intervals, got {len(zvs)}")
    t = np.asarray(t_s, dtype=np.float64)
    a = world_acceleration(accel_g, orientation, gravity)
    diags = diagnostics if diagnostics is not None else []
    # per-sample trapezoid increments, shared by every stride that covers them
    dt = np.diff(t)
    inc = 0.5 * (a[1:] + a[:-1]) * dt[:, None]
    out = []
    for k, (z0, z1) in enumerate(zip(zvs, zvs[1:])):
        i0, i1 = z0.mid, z1.mid
        tt = t[i0:i1 + 1]
        v = np.zeros((i1 - i0 + 1, 3))
        np.cumsum(inc[i0:i1], axis=0, out=v[1:])
        res = v[-1].copy()
        v -= ((tt - tt[0]) / (tt[-1] - tt[0]))[:, None] * res
        p = _cumtrapz(v, tt)
        # corrected speed over the flat parts bounding the stride
        speed = np.sqrt(np.einsum("ij,ij->i", v, v))
        zv_speed = float(max(speed[:z0.endIdx - i0 + 1].max(), speed[z1.startIdx - i0:].max()))
        if zv_speed >= residual_tol:
            diags.append(Diagnostic("ZvuResidual", f"corrected speed {zv_speed:.4f} m/s inside foot-flat", z0.side, i0))
        length = float(np.hypot(p[-1, 0], p[-1, 1])) * 100.0
        out.append(StrideTrajectory(k, i0, i1, float(tt[-1] - tt[0]), v, p, length, math.sqrt(res @ res), zv_speed))
    return out


def session_velocity(trajectories: Sequence[StrideTrajectory], total_time_s: float) -> float:
    """Walking speed in km/h from the summed stride lengths (cm) over ``total_time_s``."""
    if not total_time_s > 0:
        raise ZeroDuration(f"total time must be positive, got {total_time_s}")
    L = sum(tr.strideLength for tr in trajectories)
    return 3.6 / 100.0 * L / total_time_s


def uncorrected_drift_m(bias_mps2: float, duration_s: float) -> float:
    """Position error of plain double integration under a constant bias."""
    return 0.5 * bias_mps2 * duration_s ** 2

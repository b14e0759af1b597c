"""Stage-length schedules and temporal resampling."""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ExemplarTooShortError, InvalidParameterError, OutputTooShortError
from .motion import MotionFeatures


def round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class PyramidSchedule:
    stages: int
    exemplar_lengths: Tuple[int, ...]
    synthesis_lengths: Tuple[int, ...]
    ratio: float


def num_stages(T, p, K, r):
    coarse = K * p
    if T < coarse:
        raise ExemplarTooShortError(
            f"exemplar has {T} frames but the coarsest stage needs K*p = {coarse}")
    # the epsilon keeps exact powers of r from spilling into an extra stage
    return math.ceil(math.log(T / coarse) / math.log(r) - 1e-9) + 1


def stage_lengths(length, stages, r, minimum):
    """round(length * r^(s-S)) for s = 1..S, last entry exact, all >= minimum."""
    out = [max(minimum, round_half_up(length * r ** (s - stages))) for s in range(1, stages + 1)]
    out[-1] = length
    return tuple(out)


def build_schedule(T, F, p, K, r, stages=None) -> PyramidSchedule:
    """Schedule for one exemplar of T frames and an output of F frames.

    ``stages`` overrides S (used when several exemplars share one pyramid depth).
    """
    if not r > 1:
        raise InvalidParameterError(f"ratio must be > 1, got {r}")
    if K < 1 or p < 1:
        raise InvalidParameterError("K and p must be positive")
    if F < p:
        raise OutputTooShortError(f"output length {F} is shorter than the patch size {p}")
    S = num_stages(T, p, K, r) if stages is None else stages
    ex = list(stage_lengths(T, S, r, p))
    if S > 1 and stages is None:
        ex[0] = K * p
    syn = stage_lengths(F, S, r, p)
    return PyramidSchedule(S, tuple(ex), syn, r)


def _interp_rows(rows, target):
    n = rows.shape[0]
    x = np.arange(target) * (n - 1) / (target - 1)
    i0 = np.minimum(np.floor(x).astype(np.int64), n - 2)
    f = (x - i0)[:, None]
    return rows[i0] * (1.0 - f) + rows[i0 + 1] * f


def resample(m: MotionFeatures, target) -> MotionFeatures:
    """Linear resampling to ``target`` frames, endpoints kept.

    Root displacements are integrated into a path, which is resampled with a
    cubic spline (first and last samples pinned) and differenced again, so the
    travel from first to last frame is unchanged.
    """
    n = m.frames
    if n < 2 or target < 2:
        raise InvalidParameterError("resampling needs at least 2 frames on both sides")
    if target == n:
        return m.with_rows(m.rows.copy())
    out = _interp_rows(m.rows, target)
    vc = m.velocity_columns
    vel = m.rows[:, vc]
    cum = np.cumsum(vel, axis=0)
    x = np.arange(target) * (n - 1) / (target - 1)
    path = CubicSpline(np.arange(n), cum, axis=0)(x)
    path[0], path[-1] = cum[0], cum[-1]
    new_vel = np.empty((target, 3))
    new_vel[0] = vel[0] * (n - 1) / (target - 1)
    new_vel[1:] = np.diff(path, axis=0)
    out[:, vc] = new_vel
    return m.with_rows(out)


def build_pyramid(m: MotionFeatures, lengths):
    return [resample(m, L) for L in lengths]

"""Quintic (minimum-jerk style) path segments with online replanning.

A segment interpolates any number of axes at once from an initial
(position, velocity, acceleration) to a final position with zero final
velocity and acceleration. Replanning splices a new segment onto the old
one at the current evaluation time, so position, velocity and acceleration
stay continuous no matter how often new targets arrive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class QuinticSegment:
    """Per-axis degree-5 coefficients, lowest order first: shape (axes, 6)."""

    coeffs: np.ndarray
    duration: float
    start_time: float = 0.0

    @property
    def n_axes(self) -> int:
        return self.coeffs.shape[0]


def fit_quintic(p0, v0, a0, pf, duration) -> QuinticSegment:
    """Fit the unique quintic with x(0)=p0, x'(0)=v0, x''(0)=a0,
    x(T)=pf, x'(T)=0, x''(T)=0 on every axis."""
    if duration <= 0.0:
        raise ValueError(f"segment duration must be positive, got {duration}")
    p0 = np.atleast_1d(np.asarray(p0, dtype=np.float64))
    v0 = np.atleast_1d(np.asarray(v0, dtype=np.float64))
    a0 = np.atleast_1d(np.asarray(a0, dtype=np.float64))
    pf = np.atleast_1d(np.asarray(pf, dtype=np.float64))
    T = float(duration)
    T2, T3, T4, T5 = T * T, T ** 3, T ** 4, T ** 5
    dp = pf - p0
    c = np.empty((p0.shape[0], 6))
    c[:, 0] = p0
    c[:, 1] = v0
    c[:, 2] = 0.5 * a0
    c[:, 3] = (20.0 * dp - 12.0 * v0 * T - 3.0 * a0 * T2) / (2.0 * T3)
    c[:, 4] = (-30.0 * dp + 16.0 * v0 * T + 3.0 * a0 * T2) / (2.0 * T4)
    c[:, 5] = (12.0 * dp - 6.0 * v0 * T - a0 * T2) / (2.0 * T5)
    return QuinticSegment(coeffs=c, duration=T)


def eval_quintic(seg: QuinticSegment, t: float):
    """Position, velocity, acceleration and jerk at local time t.

    t is clamped to [0, duration]; past the end the segment holds its
    terminal values.
    """
    t = min(max(float(t), 0.0), seg.duration)
    c = seg.coeffs
    # Horner evaluation of the polynomial and its derivatives
    pos = c[:, 5]
    for k in (4, 3, 2, 1, 0):
        pos = pos * t + c[:, k]
    vel = 5.0 * c[:, 5]
    for k, m in ((4, 4.0), (3, 3.0), (2, 2.0), (1, 1.0)):
        vel = vel * t + m * c[:, k]
    acc = 20.0 * c[:, 5]
    for k, m in ((4, 12.0), (3, 6.0), (2, 2.0)):
        acc = acc * t + m * c[:, k]
    jerk = 60.0 * c[:, 5]
    for k, m in ((4, 24.0), (3, 6.0)):
        jerk = jerk * t + m * c[:, k]
    return pos, vel, acc, jerk


def replan(seg: QuinticSegment, t: float, new_target, duration) -> QuinticSegment:
    """New segment from the old segment's instantaneous state at time t.

    Position, velocity and acceleration match across the splice by
    construction.
    """
    pos, vel, acc, _ = eval_quintic(seg, t)
    return fit_quintic(pos, vel, acc, new_target, duration)

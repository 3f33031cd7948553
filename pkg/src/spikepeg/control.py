"""Cartesian impedance control and policy-action post-processing.

The impedance law renders a virtual spring-damper between the end-effector
and the moving trajectory setpoint. Damping comes from the damping ratio
and the virtual mass/inertia, so the gains stay consistent if stiffness is
retuned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import quat_conjugate, quat_multiply, quat_to_rotvec

DEG = math.pi / 180.0


@dataclass
class ImpedanceGains:
    translational_stiffness: float = 1000.0  # N/m
    rotational_stiffness: float = 10.0  # N*m/rad
    damping_ratio: float = 0.7
    virtual_mass: float = 2.0  # kg
    virtual_inertia: float = 0.005  # kg*m^2

    def __post_init__(self):
        for name in (
            "translational_stiffness",
            "rotational_stiffness",
            "damping_ratio",
            "virtual_mass",
            "virtual_inertia",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")

    @property
    def translational_damping(self) -> float:
        return 2.0 * self.damping_ratio * math.sqrt(
            self.translational_stiffness * self.virtual_mass
        )

    @property
    def rotational_damping(self) -> float:
        return 2.0 * self.damping_ratio * math.sqrt(
            self.rotational_stiffness * self.virtual_inertia
        )


@dataclass
class ActionPostprocess:
    """Bounds and deployment-matching scaling applied to raw policy actions."""

    orientation_scaling: float = 1.0
    translation_bounds: np.ndarray = field(
        default_factory=lambda: np.full(3, 0.005)
    )  # m per decision
    rotation_bounds: np.ndarray = field(
        default_factory=lambda: np.full(3, 1.0 * DEG)
    )  # rad per decision
    rotation_clamp: float = 1.0 * DEG  # hard per-axis cap after scaling

    def __post_init__(self):
        self.translation_bounds = np.asarray(self.translation_bounds, dtype=np.float64)
        self.rotation_bounds = np.asarray(self.rotation_bounds, dtype=np.float64)
        if self.orientation_scaling <= 0.0:
            raise ValueError("orientation_scaling must be > 0")
        if np.any(self.translation_bounds <= 0) or np.any(self.rotation_bounds <= 0):
            raise ValueError("action bounds must be > 0")

    @property
    def action_bounds(self) -> np.ndarray:
        """Per-axis bound of the 6-dim raw action."""
        return np.concatenate([self.translation_bounds, self.rotation_bounds])


def postprocess_action(raw, pp: ActionPostprocess, position, rotation_coords):
    """Turn a raw 6-dim pose increment into an absolute tracking target.

    Returns (target_position, target_rotation_coords, clamped_flag). The
    rotation target lives in the controller's small-angle rotation-vector
    coordinates. Raw values outside the configured bounds are clamped and
    flagged rather than rejected.
    """
    raw = np.asarray(raw, dtype=np.float64)
    bounds = np.concatenate([pp.translation_bounds, pp.rotation_bounds])
    clamped = bool(np.any(np.abs(raw) > bounds + 1e-12))
    inc = np.clip(raw, -bounds, bounds)
    rot_inc = np.clip(
        inc[3:] * pp.orientation_scaling, -pp.rotation_clamp, pp.rotation_clamp
    )
    target_pos = np.asarray(position, dtype=np.float64) + inc[:3]
    target_rot = np.asarray(rotation_coords, dtype=np.float64) + rot_inc
    return target_pos, target_rot, clamped


def impedance_wrench(
    setpoint_pos,
    setpoint_vel,
    setpoint_quat,
    setpoint_omega,
    pos,
    vel,
    quat,
    omega,
    gains: ImpedanceGains,
):
    """Commanded wrench of the virtual spring-damper.

    F = K (p_set - p) + D (v_set - v); the rotational part acts on the
    rotation-vector error between the setpoint and measured orientations.
    Returns (force, torque) in the world frame.
    """
    kp = gains.translational_stiffness
    kd = gains.translational_damping
    force = kp * (np.asarray(setpoint_pos) - np.asarray(pos)) + kd * (
        np.asarray(setpoint_vel) - np.asarray(vel)
    )
    q_err = quat_multiply(np.asarray(setpoint_quat), quat_conjugate(np.asarray(quat)))
    rot_err = quat_to_rotvec(q_err)
    torque = gains.rotational_stiffness * rot_err + gains.rotational_damping * (
        np.asarray(setpoint_omega) - np.asarray(omega)
    )
    return force, torque

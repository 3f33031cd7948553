"""Closed-loop insertion task: the RL-facing environment.

Each decision step takes a bounded 6-dim pose-increment action, replans the
active quintic segment from its current state, then runs the impedance
controller and contact physics at the inner rate for one decision period.
Observations are the 13-dim state vector (position, orientation quaternion,
noisy force-torque reading).
"""

from __future__ import annotations

import math

import numpy as np

from . import backend
from .control import ActionPostprocess, ImpedanceGains, postprocess_action
from .geometry import quat_to_rotvec
from .sim import (
    TERMINATION_CONTINUE,
    TERMINATION_SUCCESS,
    InsertionSim,
    SceneConfig,
)
from .trajectory import QuinticSegment, fit_quintic, replan


class InsertionTask:
    def __init__(
        self,
        scene: SceneConfig | None = None,
        gains: ImpedanceGains | None = None,
        post: ActionPostprocess | None = None,
        segment_duration: float = 0.3,
        decision_period: float = 0.1,
        seed: int | None = None,
    ):
        self.scene = scene if scene is not None else SceneConfig()
        self.gains = gains if gains is not None else ImpedanceGains()
        self.post = post if post is not None else ActionPostprocess()
        if segment_duration <= 0 or decision_period <= 0:
            raise ValueError("segment duration and decision period must be > 0")
        self.segment_duration = float(segment_duration)
        self.decision_period = float(decision_period)
        self.n_inner = int(round(decision_period / self.scene.dt))
        if abs(self.n_inner * self.scene.dt - decision_period) > 1e-9:
            raise ValueError("decision period must be a multiple of the inner dt")
        self.sim = InsertionSim(self.scene, seed)
        self._segment: QuinticSegment | None = None
        self._seg_time = 0.0
        self._decisions = 0

    @property
    def action_bounds(self) -> np.ndarray:
        return self.post.action_bounds

    @property
    def max_decisions(self) -> int:
        """Decision steps until the simulated-time timeout."""
        return int(math.ceil(self.scene.timeout / self.decision_period))

    def reset(self, seed: int | None = None) -> np.ndarray:
        obs = self.sim.reset(seed)
        state6 = np.concatenate(
            [self.sim.position, quat_to_rotvec(self.sim.orientation)]
        )
        self._segment = fit_quintic(state6, np.zeros(6), np.zeros(6), state6,
                                    self.segment_duration)
        self._seg_time = 0.0
        self._decisions = 0
        return obs

    def step(self, raw_action):
        """Apply one policy action; returns (obs, info).

        info carries the noisy FT reading (same one embedded in obs), the
        pose, the simulated time and the termination state.
        """
        if self._segment is None:
            raise RuntimeError("call reset() before step()")
        raw = np.asarray(raw_action, dtype=np.float64)
        if raw.shape != (6,) or not np.all(np.isfinite(raw)):
            raise ValueError("action must be a finite 6-vector")

        sim = self.sim
        target_pos, target_rot, clamped = postprocess_action(
            raw, self.post, sim.position, quat_to_rotvec(sim.orientation)
        )
        self._segment = replan(
            self._segment,
            self._seg_time,
            np.concatenate([target_pos, target_rot]),
            self.segment_duration,
        )
        scene = self.scene
        gains = self.gains
        pos, vel, quat, omega, in_hole, t_end = backend.run_segment(
            sim.position,
            sim.velocity,
            sim.orientation,
            sim.omega,
            sim.mu,
            sim.in_hole,
            self._segment.coeffs,
            self._segment.duration,
            0.0,
            scene.dt,
            self.n_inner,
            gains.translational_stiffness,
            gains.translational_damping,
            gains.rotational_stiffness,
            gains.rotational_damping,
            scene.lock_orientation,
            scene.peg_radius,
            scene.hole_radius,
            scene.hole_depth,
            scene.contact_stiffness,
            scene.contact_damping,
            scene.virtual_mass,
            scene.virtual_inertia,
            scene.stick_velocity,
        )
        sim.position = np.asarray(pos)
        sim.velocity = np.asarray(vel)
        sim.orientation = np.asarray(quat)
        sim.omega = np.asarray(omega)
        sim.in_hole = bool(in_hole)
        self._seg_time = t_end
        self._decisions += 1
        # anchor simulated time to the decision count to avoid float drift
        sim.time = self._decisions * self.decision_period

        obs = sim.observe()
        termination = sim.termination()
        info = {
            "time": sim.time,
            "termination": termination,
            "done": termination != TERMINATION_CONTINUE,
            "success": termination == TERMINATION_SUCCESS,
            "ft_force": obs[7:10].copy(),
            "ft_torque": obs[10:13].copy(),
            "position": sim.position.copy(),
            "orientation": sim.orientation.copy(),
            "in_hole": sim.in_hole,
            "clamped": clamped,
        }
        return obs, info

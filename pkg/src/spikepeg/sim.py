"""Quasi-static peg-in-hole contact environment.

A cylindrical flat-ended peg, integrated as a 6-DOF virtual rigid body under
a commanded wrench, interacts with a rigid table at z=0 that carries one
circular hole centred at the origin. Contact is penalty-based with Coulomb
friction (stick regularized by a small velocity threshold). The in/out
aperture decision is binary: the face descends past the surface only when
it lies fully inside the hole circle; afterwards a lateral wall penalty
constrains it until it reaches the bottom.

Forces and torques are sensed at the wrist (a configurable distance up the
peg axis) in the end-effector frame, with Gaussian sensor noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import quat_integrate, quat_rotate, solid_face_contact

TERMINATION_CONTINUE = "continue"
TERMINATION_SUCCESS = "success"
TERMINATION_TIMEOUT = "timeout"

STATE_DIM = 13


class SimulationFault(RuntimeError):
    """Raised when the physics receives non-finite commands."""


@dataclass
class Pose:
    position: np.ndarray  # (3,) m, peg tip
    orientation: np.ndarray  # (4,) unit quaternion (w, x, y, z)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.orientation = np.asarray(self.orientation, dtype=np.float64)
        n = np.linalg.norm(self.orientation)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"orientation quaternion not unit norm: {n}")


@dataclass
class FTReading:
    force: np.ndarray  # (3,) N, end-effector frame
    torque: np.ndarray  # (3,) N*m, end-effector frame, about the wrist

    def __post_init__(self):
        self.force = np.asarray(self.force, dtype=np.float64)
        self.torque = np.asarray(self.torque, dtype=np.float64)
        if not (np.all(np.isfinite(self.force)) and np.all(np.isfinite(self.torque))):
            raise ValueError("non-finite force-torque reading")


@dataclass
class SceneConfig:
    peg_radius: float = 0.010  # m
    hole_radius: float = 0.0105  # m, ~1 mm diametral clearance
    hole_depth: float = 0.070  # m
    contact_stiffness: float = 1.0e4  # N/m
    contact_damping_ratio: float = 1.0  # critical by default
    friction_set: tuple = (0.34, 0.38, 0.42)
    ft_noise_force: float = 0.1  # N, per axis
    ft_noise_torque: float = 0.01  # N*m, per axis
    start_offset_sigma: float = 0.02  # m, per horizontal axis
    stick_velocity: float = 1.0e-4  # m/s, tangential stick regularization
    virtual_mass: float = 2.0  # kg
    virtual_inertia: float = 0.005  # kg*m^2
    peg_length: float = 0.12  # m, tip to wrist/sensor
    dt: float = 1.0e-3  # s, inner integration step
    timeout: float = 30.0  # s, simulated
    success_z: float = -0.065  # m, tip depth that counts as inserted
    lock_orientation: bool = False

    def __post_init__(self):
        if self.hole_radius <= self.peg_radius:
            raise ValueError("hole radius must exceed peg radius")
        if self.hole_depth <= 0 or self.contact_stiffness <= 0:
            raise ValueError("hole depth and contact stiffness must be > 0")
        if any(mu <= 0 for mu in self.friction_set):
            raise ValueError("friction coefficients must be > 0")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")

    @property
    def contact_damping(self) -> float:
        return 2.0 * self.contact_damping_ratio * math.sqrt(
            self.contact_stiffness * self.virtual_mass
        )


@dataclass
class ContactResult:
    normal_force: float = 0.0  # N, magnitude
    friction_force: np.ndarray = field(default_factory=lambda: np.zeros(2))  # tangent basis
    centroid: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m
    in_hole: bool = False
    penetration: float = 0.0  # m
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world, about tip


def contact_terms(px, py, pz, vx, vy, vz, mu, in_hole,
                  r_p, r_h, depth, k_n, c_n, stick_v):
    """Scalar contact core shared by the reference path and the fallback
    inner loop; the compiled kernel mirrors it operation for operation.

    Returns (fx, fy, fz, tx, ty, tz, normal, fric_a, fric_b,
             cx, cy, cz, penetration, contact_in_hole). Torque is about the
    peg tip.
    """
    if pz >= 0.0:
        return (0.0,) * 13 + (False,)
    rho = math.hypot(px, py)
    fully_inside = rho <= r_h - r_p

    fx = fy = fz = tx = ty = tz = 0.0
    normal = fric_a = fric_b = 0.0
    cx = cy = cz = 0.0
    pen = 0.0

    if not in_hole and not fully_inside:
        # face resting on (penetrating) the tabletop
        pen = -pz
        n_mag = k_n * pen + c_n * max(-vz, 0.0)
        _, centroid_d = solid_face_contact(rho, r_p, r_h)
        if rho > 1e-12:
            ex, ey = px / rho, py / rho
        else:
            ex, ey = 1.0, 0.0
        cx, cy, cz = ex * centroid_d, ey * centroid_d, pz
        # tangential friction against horizontal slip
        speed = math.hypot(vx, vy)
        if speed <= 0.0:
            fa = fb = 0.0
        elif speed < stick_v:
            fa, fb = -(mu * n_mag / stick_v) * vx, -(mu * n_mag / stick_v) * vy
        else:
            fa, fb = -(mu * n_mag / speed) * vx, -(mu * n_mag / speed) * vy
        fx, fy, fz = fa, fb, n_mag
        rx, ry = cx - px, cy - py
        tx = ry * fz
        ty = -rx * fz
        tz = rx * fy - ry * fx
        normal, fric_a, fric_b = n_mag, fa, fb
        return (fx, fy, fz, tx, ty, tz, normal, fric_a, fric_b, cx, cy, cz, pen, False)

    # inside the hole volume
    wall_pen = rho + r_p - r_h
    if wall_pen > 0.0 and pz > -depth:
        ex, ey = px / rho, py / rho
        v_out = vx * ex + vy * ey
        n_mag = k_n * wall_pen + c_n * max(v_out, 0.0)
        # slip in the wall tangent plane: azimuthal and vertical
        v_az = -vx * ey + vy * ex
        speed = math.hypot(v_az, vz)
        if speed <= 0.0:
            f_az = f_vert = 0.0
        elif speed < stick_v:
            f_az, f_vert = -(mu * n_mag / stick_v) * v_az, -(mu * n_mag / stick_v) * vz
        else:
            f_az, f_vert = -(mu * n_mag / speed) * v_az, -(mu * n_mag / speed) * vz
        wfx = -n_mag * ex - f_az * ey
        wfy = -n_mag * ey + f_az * ex
        wfz = f_vert
        ccx, ccy, ccz = px + r_p * ex, py + r_p * ey, 0.5 * pz
        rx, ry, rz = ccx - px, ccy - py, ccz - pz
        fx += wfx
        fy += wfy
        fz += wfz
        tx += ry * wfz - rz * wfy
        ty += rz * wfx - rx * wfz
        tz += rx * wfy - ry * wfx
        normal = n_mag
        fric_a, fric_b = f_az, f_vert
        cx, cy, cz = ccx, ccy, ccz
        pen = wall_pen

    bottom_pen = -depth - pz
    if bottom_pen > 0.0:
        n_mag = k_n * bottom_pen + c_n * max(-vz, 0.0)
        speed = math.hypot(vx, vy)
        if speed <= 0.0:
            fa = fb = 0.0
        elif speed < stick_v:
            fa, fb = -(mu * n_mag / stick_v) * vx, -(mu * n_mag / stick_v) * vy
        else:
            fa, fb = -(mu * n_mag / speed) * vx, -(mu * n_mag / speed) * vy
        fx += fa
        fy += fb
        fz += n_mag
        # force acts at the face centre: lever arm is purely vertical,
        # r = (0, 0, bottom_pen), so r x f = (-rz*fy, rz*fx, 0)
        rz = bottom_pen
        tx += -rz * fb
        ty += rz * fa
        normal += n_mag
        if pen == 0.0:
            fric_a, fric_b = fa, fb
            cx, cy, cz = px, py, -depth
            pen = bottom_pen

    return (fx, fy, fz, tx, ty, tz, normal, fric_a, fric_b, cx, cy, cz, pen, True)


def contact_wrench(pose: Pose, velocity, cfg: SceneConfig, mu: float,
                   in_hole: bool = False) -> ContactResult:
    """Contact wrench on the peg, torque taken about the tip.

    `in_hole` is the binary admission state owned by the caller: once the
    face has descended through the aperture, the lateral wall model applies
    instead of the tabletop penalty.
    """
    p = pose.position
    v = np.asarray(velocity, dtype=np.float64)
    (fx, fy, fz, tx, ty, tz, normal, fa, fb, cx, cy, cz, pen, hole) = contact_terms(
        p[0], p[1], p[2], v[0], v[1], v[2], mu, in_hole,
        cfg.peg_radius, cfg.hole_radius, cfg.hole_depth,
        cfg.contact_stiffness, cfg.contact_damping, cfg.stick_velocity,
    )
    return ContactResult(
        normal_force=normal,
        friction_force=np.array([fa, fb]),
        centroid=np.array([cx, cy, cz]),
        in_hole=hole,
        penetration=pen,
        force=np.array([fx, fy, fz]),
        torque=np.array([tx, ty, tz]),
    )


def sense_ft(force, torque, cfg: SceneConfig, rng, quat=None) -> FTReading:
    """Noisy sensor reading of a true world-frame wrench.

    Adds zero-mean Gaussian noise per axis and, when a quaternion is given,
    expresses the result in the end-effector frame.
    """
    f = np.asarray(force, dtype=np.float64)
    t = np.asarray(torque, dtype=np.float64)
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(t))):
        raise ValueError("non-finite wrench")
    if quat is not None:
        # world -> EE frame: rotate by the conjugate
        qc = np.array([quat[0], -quat[1], -quat[2], -quat[3]])
        f = quat_rotate(qc, f)
        t = quat_rotate(qc, t)
    noise_f = rng.normal(0.0, cfg.ft_noise_force, 3) if cfg.ft_noise_force > 0 else np.zeros(3)
    noise_t = rng.normal(0.0, cfg.ft_noise_torque, 3) if cfg.ft_noise_torque > 0 else np.zeros(3)
    return FTReading(force=f + noise_f, torque=t + noise_t)


def check_termination(tip_z: float, elapsed: float, cfg: SceneConfig) -> str:
    if tip_z <= cfg.success_z:
        return TERMINATION_SUCCESS
    if elapsed >= cfg.timeout:
        return TERMINATION_TIMEOUT
    return TERMINATION_CONTINUE


class InsertionSim:
    """Owns the peg state, the episode RNG and the contact bookkeeping."""

    def __init__(self, cfg: SceneConfig | None = None, seed: int | None = None):
        self.cfg = cfg if cfg is not None else SceneConfig()
        self.rng = np.random.default_rng(seed)
        self.position = np.zeros(3)
        self.velocity = np.zeros(3)
        self.orientation = np.array([1.0, 0.0, 0.0, 0.0])
        self.omega = np.zeros(3)
        self.mu = float(self.cfg.friction_set[0])
        self.time = 0.0
        self.in_hole = False

    # -- episode lifecycle -------------------------------------------------

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Place the peg vertically at the table surface with a Gaussian
        horizontal offset, draw the episode friction coefficient, and return
        the initial 13-dim observation."""
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        cfg = self.cfg
        xy = self.rng.normal(0.0, cfg.start_offset_sigma, 2)
        self.position = np.array([xy[0], xy[1], 0.0])
        self.velocity = np.zeros(3)
        self.orientation = np.array([1.0, 0.0, 0.0, 0.0])
        self.omega = np.zeros(3)
        self.mu = float(cfg.friction_set[int(self.rng.integers(len(cfg.friction_set)))])
        self.time = 0.0
        self.in_hole = False
        return self.observe()

    @property
    def pose(self) -> Pose:
        return Pose(position=self.position.copy(), orientation=self.orientation.copy())

    # -- dynamics ----------------------------------------------------------

    def inner_step(self, cmd_force, cmd_torque, dt: float | None = None):
        """Semi-implicit Euler step under commanded + contact wrench."""
        cfg = self.cfg
        h = cfg.dt if dt is None else float(dt)
        if h <= 0:
            raise ValueError("dt must be > 0")
        f_cmd = np.asarray(cmd_force, dtype=np.float64)
        t_cmd = np.asarray(cmd_torque, dtype=np.float64)
        if not (np.all(np.isfinite(f_cmd)) and np.all(np.isfinite(t_cmd))):
            raise SimulationFault("non-finite commanded wrench")

        contact = contact_wrench(self.pose, self.velocity, cfg, self.mu, self.in_hole)
        total_f = f_cmd + contact.force
        self.velocity = self.velocity + (h / cfg.virtual_mass) * total_f
        self.position = self.position + h * self.velocity
        if not cfg.lock_orientation:
            total_t = t_cmd + contact.torque
            self.omega = self.omega + (h / cfg.virtual_inertia) * total_t
            self.orientation = quat_integrate(self.orientation, self.omega, h)
        self.time += h
        self._update_in_hole()
        return self.pose, self.velocity.copy()

    def _update_in_hole(self):
        z = self.position[2]
        if z >= 0.0:
            self.in_hole = False
        elif not self.in_hole:
            rho = math.hypot(self.position[0], self.position[1])
            if rho <= self.cfg.hole_radius - self.cfg.peg_radius:
                self.in_hole = True

    # -- sensing -----------------------------------------------------------

    def current_contact(self) -> ContactResult:
        return contact_wrench(self.pose, self.velocity, self.cfg, self.mu, self.in_hole)

    def wrist_wrench(self):
        """True contact wrench at the wrist, world frame."""
        contact = self.current_contact()
        up = quat_rotate(self.orientation, np.array([0.0, 0.0, 1.0]))
        # torque about tip -> about wrist located peg_length up the axis
        torque = contact.torque + np.cross(-self.cfg.peg_length * up, contact.force)
        return contact.force, torque

    def observe(self) -> np.ndarray:
        """13-dim observation: tip position, orientation quaternion, noisy FT."""
        force, torque = self.wrist_wrench()
        ft = sense_ft(force, torque, self.cfg, self.rng, quat=self.orientation)
        return np.concatenate([self.position, self.orientation, ft.force, ft.torque])

    def termination(self) -> str:
        return check_termination(self.position[2], self.time, self.cfg)

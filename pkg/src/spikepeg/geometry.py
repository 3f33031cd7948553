"""Quaternion and planar circle-overlap geometry used by the contact model.

Quaternions are stored as (w, x, y, z) float64 arrays and kept unit-norm by
the caller. All functions are pure.
"""

from __future__ import annotations

import math

import numpy as np


def quat_normalize(q):
    q = np.asarray(q, dtype=np.float64)
    n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if n == 0.0:
        raise ValueError("zero-norm quaternion")
    return q / n


def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    vx, vy, vz = v
    # t = 2 * (q_vec x v); v' = v + w*t + q_vec x t
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return np.array(
        [
            vx + w * tx + y * tz - z * ty,
            vy + w * ty + z * tx - x * tz,
            vz + w * tz + x * ty - y * tx,
        ]
    )


def quat_from_rotvec(r):
    """Unit quaternion for a rotation vector (axis * angle, radians)."""
    r = np.asarray(r, dtype=np.float64)
    angle = math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    if angle < 1e-12:
        # first-order expansion, renormalized
        q = np.array([1.0, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2]])
        return quat_normalize(q)
    axis = r / angle
    half = 0.5 * angle
    s = math.sin(half)
    return np.array([math.cos(half), s * axis[0], s * axis[1], s * axis[2]])


def quat_to_rotvec(q):
    """Rotation vector of a unit quaternion, canonical angle in [0, pi]."""
    w, x, y, z = q
    if w < 0.0:  # take the short way around
        w, x, y, z = -w, -x, -y, -z
    s = math.sqrt(x * x + y * y + z * z)
    if s < 1e-12:
        return np.array([2.0 * x, 2.0 * y, 2.0 * z])
    angle = 2.0 * math.atan2(s, w)
    return np.array([x, y, z]) * (angle / s)


def quat_integrate(q, omega, dt):
    """One explicit step of qdot = 0.5 * (0, omega) * q, renormalized."""
    w, x, y, z = q
    ox, oy, oz = omega
    dw = 0.5 * (-ox * x - oy * y - oz * z)
    dx = 0.5 * (ox * w + oy * z - oz * y)
    dy = 0.5 * (oy * w + oz * x - ox * z)
    dz = 0.5 * (oz * w + ox * y - oy * x)
    return quat_normalize(np.array([w + dw * dt, x + dx * dt, y + dy * dt, z + dz * dt]))


def circular_segment(r, h):
    """Area and centroid offset of the region {x >= h} of a disc of radius r.

    h is signed (in [-r, r]): negative h gives the major segment. The
    centroid offset is measured from the disc centre along +x and is always
    >= 0. Returns (area, centroid_offset).
    """
    if h >= r:
        return 0.0, 0.0
    if h <= -r:
        return math.pi * r * r, 0.0
    area = r * r * math.acos(h / r) - h * math.sqrt(r * r - h * h)
    cx = (2.0 / 3.0) * (r * r - h * h) ** 1.5 / area
    return area, cx


def disc_hole_overlap(d, r_disc, r_hole):
    """Intersection of a disc with a hole circle, both in the plane.

    The disc centre sits a distance d >= 0 from the hole centre. Returns
    (lens_area, lens_centroid) where the centroid is the signed distance of
    the intersection's centroid from the *hole* centre along the line
    towards the disc centre.
    """
    if d >= r_disc + r_hole:
        return 0.0, 0.0
    if d <= r_hole - r_disc:
        return math.pi * r_disc * r_disc, d
    if d <= r_disc - r_hole:  # hole fully inside disc (not used with r_p < r_h)
        return math.pi * r_hole * r_hole, 0.0
    # chord distances from the two centres (signed)
    h_disc = (d * d - r_hole * r_hole + r_disc * r_disc) / (2.0 * d)
    h_hole = d - h_disc
    a_disc, c_disc = circular_segment(r_disc, h_disc)
    a_hole, c_hole = circular_segment(r_hole, h_hole)
    area = a_disc + a_hole
    # disc segment centroid sits at d - c_disc from the hole centre, the
    # hole segment centroid at +c_hole
    centroid = (a_disc * (d - c_disc) + a_hole * c_hole) / area
    return area, centroid


def solid_face_contact(d, r_disc, r_hole):
    """Area and centroid of the disc part resting on solid table.

    Solid region = disc minus the hole lens. Returns (area, centroid) with
    the centroid measured from the *hole* centre along the line towards the
    disc centre (the full-disc case degenerates to the disc centre itself).
    """
    full = math.pi * r_disc * r_disc
    lens_area, lens_centroid = disc_hole_overlap(d, r_disc, r_hole)
    area = full - lens_area
    if area <= 0.0:
        return 0.0, 0.0
    centroid = (full * d - lens_area * lens_centroid) / area
    return area, centroid

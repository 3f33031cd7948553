"""Numpy fallback implementations of the compiled kernels.

Same call signatures and semantics as the Cython module `_kernels`; used
when the extension is not built (or when SPIKEPEG_BACKEND=python).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import quat_conjugate, quat_integrate, quat_multiply, quat_to_rotvec
from .sim import contact_terms


def snn_forward(inj, w2, b2, w3, b3, current_decay, voltage_decay, threshold, timesteps):
    """LIF network inference with a constant layer-1 injection current.

    Returns (counts (60,) int64, spikes1 (T,256) uint8, spikes2 (T,256),
    spikes3 (T,60)).
    """
    n1 = inj.shape[0]
    n2 = w2.shape[1]
    n3 = w3.shape[1]
    T = int(timesteps)
    c1 = np.zeros(n1)
    v1 = np.zeros(n1)
    s1 = np.zeros(n1)
    c2 = np.zeros(n2)
    v2 = np.zeros(n2)
    s2 = np.zeros(n2)
    c3 = np.zeros(n3)
    v3 = np.zeros(n3)
    s3 = np.zeros(n3)
    r1 = np.zeros((T, n1), dtype=np.uint8)
    r2 = np.zeros((T, n2), dtype=np.uint8)
    r3 = np.zeros((T, n3), dtype=np.uint8)
    counts = np.zeros(n3, dtype=np.int64)
    for t in range(T):
        c1 = current_decay * c1 + inj
        v1 = voltage_decay * v1 * (1.0 - s1) + c1
        s1 = (v1 >= threshold).astype(np.float64)
        c2 = current_decay * c2 + (s1 @ w2 + b2)
        v2 = voltage_decay * v2 * (1.0 - s2) + c2
        s2 = (v2 >= threshold).astype(np.float64)
        c3 = current_decay * c3 + (s2 @ w3 + b3)
        v3 = voltage_decay * v3 * (1.0 - s3) + c3
        s3 = (v3 >= threshold).astype(np.float64)
        r1[t] = s1.astype(np.uint8)
        r2[t] = s2.astype(np.uint8)
        r3[t] = s3.astype(np.uint8)
        counts += s3.astype(np.int64)
    return counts, r1, r2, r3


def snn_forward_quant(
    inj,
    w2,
    b2,
    w3,
    b3,
    thr1,
    thr2,
    thr3,
    decay_c_num,
    decay_c_shift,
    decay_v_num,
    decay_v_shift,
    timesteps,
    guard_shift,
):
    """Integer-arithmetic twin of `snn_forward`.

    All state is int64. Layer-1 injection `inj` is already expressed in that
    layer's fixed-point unit; layers 2 and 3 accumulate integer synaptic
    events shifted up by `guard_shift` fractional bits. Decays are exact
    binary fractions num/2^shift applied with arithmetic right shifts.
    """
    n1 = inj.shape[0]
    n2 = w2.shape[1]
    n3 = w3.shape[1]
    T = int(timesteps)
    c1 = np.zeros(n1, dtype=np.int64)
    v1 = np.zeros(n1, dtype=np.int64)
    s1 = np.zeros(n1, dtype=np.int64)
    c2 = np.zeros(n2, dtype=np.int64)
    v2 = np.zeros(n2, dtype=np.int64)
    s2 = np.zeros(n2, dtype=np.int64)
    c3 = np.zeros(n3, dtype=np.int64)
    v3 = np.zeros(n3, dtype=np.int64)
    s3 = np.zeros(n3, dtype=np.int64)
    r1 = np.zeros((T, n1), dtype=np.uint8)
    r2 = np.zeros((T, n2), dtype=np.uint8)
    r3 = np.zeros((T, n3), dtype=np.uint8)
    counts = np.zeros(n3, dtype=np.int64)
    b2s = b2 << guard_shift
    b3s = b3 << guard_shift
    for t in range(T):
        c1 = ((c1 * decay_c_num) >> decay_c_shift) + inj
        v1 = ((v1 * decay_v_num) >> decay_v_shift) * (1 - s1) + c1
        s1 = (v1 >= thr1).astype(np.int64)
        acc2 = (s1 @ w2) << guard_shift
        c2 = ((c2 * decay_c_num) >> decay_c_shift) + acc2 + b2s
        v2 = ((v2 * decay_v_num) >> decay_v_shift) * (1 - s2) + c2
        s2 = (v2 >= thr2).astype(np.int64)
        acc3 = (s2 @ w3) << guard_shift
        c3 = ((c3 * decay_c_num) >> decay_c_shift) + acc3 + b3s
        v3 = ((v3 * decay_v_num) >> decay_v_shift) * (1 - s3) + c3
        s3 = (v3 >= thr3).astype(np.int64)
        r1[t] = s1.astype(np.uint8)
        r2[t] = s2.astype(np.uint8)
        r3[t] = s3.astype(np.uint8)
        counts += s3
    return counts, r1, r2, r3


def run_segment(
    pos,
    vel,
    quat,
    omega,
    mu,
    in_hole,
    coeffs,
    duration,
    t0,
    dt,
    n_steps,
    k_t,
    d_t,
    k_r,
    d_r,
    lock_orientation,
    r_p,
    r_h,
    depth,
    k_n,
    c_n,
    mass,
    inertia,
    stick_v,
):
    """Advance the closed loop (trajectory setpoint -> impedance -> contact
    -> semi-implicit Euler) for n_steps of size dt.

    `coeffs` is the active 6-axis quintic (6, 6) of the given duration;
    trajectory time starts at t0, advances dt per step and is clamped to the
    duration (the segment holds its terminal values beyond the end).
    Returns (pos, vel, quat, omega, in_hole, t_end).
    """
    p = np.array(pos, dtype=np.float64)
    v = np.array(vel, dtype=np.float64)
    q = np.array(quat, dtype=np.float64)
    w = np.array(omega, dtype=np.float64)
    c = np.asarray(coeffs, dtype=np.float64)
    t = float(t0)
    hole = bool(in_hole)
    for _ in range(int(n_steps)):
        t += dt
        tc = min(t, duration)
        # quintic setpoint (Horner), all six axes; clamping to the duration
        # holds the terminal values
        sp = ((((c[:, 5] * tc + c[:, 4]) * tc + c[:, 3]) * tc + c[:, 2]) * tc + c[:, 1]) * tc + c[:, 0]
        spv = (((5.0 * c[:, 5] * tc + 4.0 * c[:, 4]) * tc + 3.0 * c[:, 3]) * tc + 2.0 * c[:, 2]) * tc + c[:, 1]
        f_cmd = k_t * (sp[:3] - p) + d_t * (spv[:3] - v)
        (cfx, cfy, cfz, ctx, cty, ctz, _, _, _, _, _, _, _, _) = contact_terms(
            p[0], p[1], p[2], v[0], v[1], v[2], mu, hole,
            r_p, r_h, depth, k_n, c_n, stick_v,
        )
        v = v + (dt / mass) * (f_cmd + np.array([cfx, cfy, cfz]))
        p = p + dt * v
        if not lock_orientation:
            q_set = _quat_from_rotvec3(sp[3], sp[4], sp[5])
            rot_err = quat_to_rotvec(quat_multiply(q_set, quat_conjugate(q)))
            t_cmd = k_r * rot_err + d_r * (spv[3:] - w)
            w = w + (dt / inertia) * (t_cmd + np.array([ctx, cty, ctz]))
            q = quat_integrate(q, w, dt)
        # binary aperture admission
        if p[2] >= 0.0:
            hole = False
        elif not hole:
            if math.hypot(p[0], p[1]) <= r_h - r_p:
                hole = True
    return p, v, q, w, hole, t


def _quat_from_rotvec3(rx, ry, rz):
    angle = math.sqrt(rx * rx + ry * ry + rz * rz)
    if angle < 1e-12:
        n = math.sqrt(1.0 + 0.25 * (rx * rx + ry * ry + rz * rz))
        return np.array([1.0 / n, 0.5 * rx / n, 0.5 * ry / n, 0.5 * rz / n])
    half = 0.5 * angle
    s = math.sin(half) / angle
    return np.array([math.cos(half), rx * s, ry * s, rz * s])

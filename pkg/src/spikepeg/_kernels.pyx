# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: LIF network inference (float and fixed-point) and
the closed-loop simulation window. Semantics mirror `_kernels_py`."""

from libc.math cimport acos, atan2, cos, fabs, hypot, pi, sin, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()


def snn_forward(double[::1] inj, double[:, ::1] w2, double[::1] b2,
                double[:, ::1] w3, double[::1] b3,
                double current_decay, double voltage_decay, double threshold,
                int timesteps):
    cdef Py_ssize_t n1 = inj.shape[0]
    cdef Py_ssize_t n2 = w2.shape[1]
    cdef Py_ssize_t n3 = w3.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r1 = np.zeros((timesteps, n1), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r2 = np.zeros((timesteps, n2), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r3 = np.zeros((timesteps, n3), dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n3, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = np.zeros(3 * n1 + 3 * n2 + 3 * n3 + n2 + n3)
    cdef double[::1] c1 = buf[:n1]
    cdef double[::1] v1 = buf[n1:2 * n1]
    cdef double[::1] s1 = buf[2 * n1:3 * n1]
    cdef Py_ssize_t o = 3 * n1
    cdef double[::1] c2 = buf[o:o + n2]
    cdef double[::1] v2 = buf[o + n2:o + 2 * n2]
    cdef double[::1] s2 = buf[o + 2 * n2:o + 3 * n2]
    cdef double[::1] i2 = buf[o + 3 * n2:o + 4 * n2]
    o = o + 4 * n2
    cdef double[::1] c3 = buf[o:o + n3]
    cdef double[::1] v3 = buf[o + n3:o + 2 * n3]
    cdef double[::1] s3 = buf[o + 2 * n3:o + 3 * n3]
    cdef double[::1] i3 = buf[o + 3 * n3:o + 4 * n3]
    cdef Py_ssize_t t, i, j
    cdef cnp.uint8_t[:, ::1] r1v = r1
    cdef cnp.uint8_t[:, ::1] r2v = r2
    cdef cnp.uint8_t[:, ::1] r3v = r3
    cdef cnp.int64_t[::1] cv = counts

    for t in range(timesteps):
        # layer 1: constant injection
        for i in range(n1):
            c1[i] = current_decay * c1[i] + inj[i]
            v1[i] = voltage_decay * v1[i] * (1.0 - s1[i]) + c1[i]
            s1[i] = 1.0 if v1[i] >= threshold else 0.0
            r1v[t, i] = <cnp.uint8_t>(1 if s1[i] != 0.0 else 0)
        # layer 2: event-driven accumulation of spiking rows
        for i in range(n2):
            i2[i] = b2[i]
        for j in range(n1):
            if s1[j] != 0.0:
                for i in range(n2):
                    i2[i] = i2[i] + w2[j, i]
        for i in range(n2):
            c2[i] = current_decay * c2[i] + i2[i]
            v2[i] = voltage_decay * v2[i] * (1.0 - s2[i]) + c2[i]
            s2[i] = 1.0 if v2[i] >= threshold else 0.0
            r2v[t, i] = <cnp.uint8_t>(1 if s2[i] != 0.0 else 0)
        # layer 3
        for i in range(n3):
            i3[i] = b3[i]
        for j in range(n2):
            if s2[j] != 0.0:
                for i in range(n3):
                    i3[i] = i3[i] + w3[j, i]
        for i in range(n3):
            c3[i] = current_decay * c3[i] + i3[i]
            v3[i] = voltage_decay * v3[i] * (1.0 - s3[i]) + c3[i]
            s3[i] = 1.0 if v3[i] >= threshold else 0.0
            r3v[t, i] = <cnp.uint8_t>(1 if s3[i] != 0.0 else 0)
            if s3[i] != 0.0:
                cv[i] += 1
    return counts, r1, r2, r3


def snn_forward_quant(cnp.int64_t[::1] inj,
                      cnp.int64_t[:, ::1] w2, cnp.int64_t[::1] b2,
                      cnp.int64_t[:, ::1] w3, cnp.int64_t[::1] b3,
                      cnp.int64_t thr1, cnp.int64_t thr2, cnp.int64_t thr3,
                      cnp.int64_t decay_c_num, int decay_c_shift,
                      cnp.int64_t decay_v_num, int decay_v_shift,
                      int timesteps, int guard_shift):
    cdef Py_ssize_t n1 = inj.shape[0]
    cdef Py_ssize_t n2 = w2.shape[1]
    cdef Py_ssize_t n3 = w3.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r1 = np.zeros((timesteps, n1), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r2 = np.zeros((timesteps, n2), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] r3 = np.zeros((timesteps, n3), dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(n3, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] buf = np.zeros(3 * n1 + 4 * n2 + 4 * n3, dtype=np.int64)
    cdef cnp.int64_t[::1] c1 = buf[:n1]
    cdef cnp.int64_t[::1] v1 = buf[n1:2 * n1]
    cdef cnp.int64_t[::1] s1 = buf[2 * n1:3 * n1]
    cdef Py_ssize_t o = 3 * n1
    cdef cnp.int64_t[::1] c2 = buf[o:o + n2]
    cdef cnp.int64_t[::1] v2 = buf[o + n2:o + 2 * n2]
    cdef cnp.int64_t[::1] s2 = buf[o + 2 * n2:o + 3 * n2]
    cdef cnp.int64_t[::1] i2 = buf[o + 3 * n2:o + 4 * n2]
    o = o + 4 * n2
    cdef cnp.int64_t[::1] c3 = buf[o:o + n3]
    cdef cnp.int64_t[::1] v3 = buf[o + n3:o + 2 * n3]
    cdef cnp.int64_t[::1] s3 = buf[o + 2 * n3:o + 3 * n3]
    cdef cnp.int64_t[::1] i3 = buf[o + 3 * n3:o + 4 * n3]
    cdef cnp.uint8_t[:, ::1] r1v = r1
    cdef cnp.uint8_t[:, ::1] r2v = r2
    cdef cnp.uint8_t[:, ::1] r3v = r3
    cdef cnp.int64_t[::1] cv = counts
    cdef Py_ssize_t t, i, j
    cdef cnp.int64_t acc

    for t in range(timesteps):
        for i in range(n1):
            c1[i] = ((c1[i] * decay_c_num) >> decay_c_shift) + inj[i]
            v1[i] = ((v1[i] * decay_v_num) >> decay_v_shift) * (1 - s1[i]) + c1[i]
            s1[i] = 1 if v1[i] >= thr1 else 0
            r1v[t, i] = <cnp.uint8_t>s1[i]
        for i in range(n2):
            i2[i] = 0
        for j in range(n1):
            if s1[j] != 0:
                for i in range(n2):
                    i2[i] = i2[i] + w2[j, i]
        for i in range(n2):
            acc = (i2[i] << guard_shift) + (b2[i] << guard_shift)
            c2[i] = ((c2[i] * decay_c_num) >> decay_c_shift) + acc
            v2[i] = ((v2[i] * decay_v_num) >> decay_v_shift) * (1 - s2[i]) + c2[i]
            s2[i] = 1 if v2[i] >= thr2 else 0
            r2v[t, i] = <cnp.uint8_t>s2[i]
        for i in range(n3):
            i3[i] = 0
        for j in range(n2):
            if s2[j] != 0:
                for i in range(n3):
                    i3[i] = i3[i] + w3[j, i]
        for i in range(n3):
            acc = (i3[i] << guard_shift) + (b3[i] << guard_shift)
            c3[i] = ((c3[i] * decay_c_num) >> decay_c_shift) + acc
            v3[i] = ((v3[i] * decay_v_num) >> decay_v_shift) * (1 - s3[i]) + c3[i]
            s3[i] = 1 if v3[i] >= thr3 else 0
            r3v[t, i] = <cnp.uint8_t>s3[i]
            if s3[i] != 0:
                cv[i] += 1
    return counts, r1, r2, r3


# ---------------------------------------------------------------------------
# closed-loop simulation window
# ---------------------------------------------------------------------------

cdef struct ContactOut:
    double fx, fy, fz, tx, ty, tz


cdef inline double _seg_centroid(double r, double h) nogil:
    """Centroid offset of the disc region {x >= h}; 0 beyond the rim."""
    cdef double area
    if h >= r:
        return 0.0
    if h <= -r:
        return 0.0
    area = r * r * acos(h / r) - h * sqrt(r * r - h * h)
    return (2.0 / 3.0) * (r * r - h * h) ** 1.5 / area


cdef inline double _seg_area(double r, double h) nogil:
    if h >= r:
        return 0.0
    if h <= -r:
        return pi * r * r
    return r * r * acos(h / r) - h * sqrt(r * r - h * h)


cdef void _contact(double px, double py, double pz,
                   double vx, double vy, double vz,
                   double mu, bint in_hole,
                   double r_p, double r_h, double depth,
                   double k_n, double c_n, double stick_v,
                   ContactOut* out) nogil:
    cdef double rho, pen, n_mag, ex, ey, speed, fa, fb
    cdef double a_disc, a_lens, c_lens, h_disc, h_hole, a_dseg, c_dseg, a_hseg, c_hseg
    cdef double centroid_d, cx, cy, cz, rx, ry, rz
    cdef double wall_pen, v_out, v_az, f_az, f_vert, wfx, wfy, wfz
    cdef double bottom_pen
    cdef bint fully_inside
    out.fx = 0.0; out.fy = 0.0; out.fz = 0.0
    out.tx = 0.0; out.ty = 0.0; out.tz = 0.0
    if pz >= 0.0:
        return
    rho = hypot(px, py)
    fully_inside = rho <= r_h - r_p

    if (not in_hole) and (not fully_inside):
        pen = -pz
        n_mag = k_n * pen + c_n * (-vz if -vz > 0.0 else 0.0)
        # centroid of disc minus hole lens, from the hole centre towards the
        # disc centre (mirrors geometry.solid_face_contact)
        a_disc = pi * r_p * r_p
        if rho >= r_p + r_h:
            a_lens = 0.0
            c_lens = 0.0
        elif rho <= r_h - r_p:
            a_lens = a_disc
            c_lens = rho
        else:
            h_disc = (rho * rho - r_h * r_h + r_p * r_p) / (2.0 * rho)
            h_hole = rho - h_disc
            a_dseg = _seg_area(r_p, h_disc)
            c_dseg = _seg_centroid(r_p, h_disc)
            a_hseg = _seg_area(r_h, h_hole)
            c_hseg = _seg_centroid(r_h, h_hole)
            a_lens = a_dseg + a_hseg
            c_lens = (a_dseg * (rho - c_dseg) + a_hseg * c_hseg) / a_lens
        if a_disc - a_lens <= 0.0:
            centroid_d = 0.0
        else:
            centroid_d = (a_disc * rho - a_lens * c_lens) / (a_disc - a_lens)
        if rho > 1e-12:
            ex = px / rho
            ey = py / rho
        else:
            ex = 1.0
            ey = 0.0
        cx = ex * centroid_d
        cy = ey * centroid_d
        cz = pz
        speed = hypot(vx, vy)
        if speed <= 0.0:
            fa = 0.0; fb = 0.0
        elif speed < stick_v:
            fa = -(mu * n_mag / stick_v) * vx
            fb = -(mu * n_mag / stick_v) * vy
        else:
            fa = -(mu * n_mag / speed) * vx
            fb = -(mu * n_mag / speed) * vy
        out.fx = fa; out.fy = fb; out.fz = n_mag
        rx = cx - px
        ry = cy - py
        out.tx = ry * n_mag
        out.ty = -rx * n_mag
        out.tz = rx * fb - ry * fa
        return

    # inside the hole volume
    wall_pen = rho + r_p - r_h
    if wall_pen > 0.0 and pz > -depth:
        ex = px / rho
        ey = py / rho
        v_out = vx * ex + vy * ey
        n_mag = k_n * wall_pen + c_n * (v_out if v_out > 0.0 else 0.0)
        v_az = -vx * ey + vy * ex
        speed = hypot(v_az, vz)
        if speed <= 0.0:
            f_az = 0.0; f_vert = 0.0
        elif speed < stick_v:
            f_az = -(mu * n_mag / stick_v) * v_az
            f_vert = -(mu * n_mag / stick_v) * vz
        else:
            f_az = -(mu * n_mag / speed) * v_az
            f_vert = -(mu * n_mag / speed) * vz
        wfx = -n_mag * ex - f_az * ey
        wfy = -n_mag * ey + f_az * ex
        wfz = f_vert
        rx = r_p * ex
        ry = r_p * ey
        rz = 0.5 * pz - pz
        out.fx += wfx; out.fy += wfy; out.fz += wfz
        out.tx += ry * wfz - rz * wfy
        out.ty += rz * wfx - rx * wfz
        out.tz += rx * wfy - ry * wfx

    bottom_pen = -depth - pz
    if bottom_pen > 0.0:
        n_mag = k_n * bottom_pen + c_n * (-vz if -vz > 0.0 else 0.0)
        speed = hypot(vx, vy)
        if speed <= 0.0:
            fa = 0.0; fb = 0.0
        elif speed < stick_v:
            fa = -(mu * n_mag / stick_v) * vx
            fb = -(mu * n_mag / stick_v) * vy
        else:
            fa = -(mu * n_mag / speed) * vx
            fb = -(mu * n_mag / speed) * vy
        out.fx += fa; out.fy += fb; out.fz += n_mag
        out.tx += -bottom_pen * fb
        out.ty += bottom_pen * fa


def contact_probe(double px, double py, double pz,
                  double vx, double vy, double vz,
                  double mu, bint in_hole,
                  double r_p, double r_h, double depth,
                  double k_n, double c_n, double stick_v):
    """Expose the C contact model for parity tests: (force, torque)."""
    cdef ContactOut out
    _contact(px, py, pz, vx, vy, vz, mu, in_hole, r_p, r_h, depth,
             k_n, c_n, stick_v, &out)
    return (np.array([out.fx, out.fy, out.fz]),
            np.array([out.tx, out.ty, out.tz]))


def run_segment(double[::1] pos, double[::1] vel, double[::1] quat,
                double[::1] omega, double mu, bint in_hole,
                double[:, ::1] coeffs, double duration, double t0,
                double dt, int n_steps,
                double k_t, double d_t, double k_r, double d_r,
                bint lock_orientation,
                double r_p, double r_h, double depth,
                double k_n, double c_n, double mass, double inertia,
                double stick_v):
    cdef double px = pos[0], py = pos[1], pz = pos[2]
    cdef double vx = vel[0], vy = vel[1], vz = vel[2]
    cdef double qw = quat[0], qx = quat[1], qy = quat[2], qz = quat[3]
    cdef double ox = omega[0], oy = omega[1], oz = omega[2]
    cdef double t = t0
    cdef bint hole = in_hole
    cdef Py_ssize_t step, a
    cdef double tc
    cdef double sp[6]
    cdef double spv[6]
    cdef double fcx, fcy, fcz
    cdef double sw, sx, sy, szz, n, angle, half, sfac
    cdef double ew, exq, eyq, ezq, s_norm, rex, rey, rez
    cdef double tcx, tcy, tcz
    cdef double dw, dx, dy, dz
    cdef ContactOut con

    for step in range(n_steps):
        t += dt
        tc = t if t < duration else duration
        for a in range(6):
            sp[a] = ((((coeffs[a, 5] * tc + coeffs[a, 4]) * tc + coeffs[a, 3]) * tc
                      + coeffs[a, 2]) * tc + coeffs[a, 1]) * tc + coeffs[a, 0]
            spv[a] = (((5.0 * coeffs[a, 5] * tc + 4.0 * coeffs[a, 4]) * tc
                       + 3.0 * coeffs[a, 3]) * tc + 2.0 * coeffs[a, 2]) * tc + coeffs[a, 1]
        fcx = k_t * (sp[0] - px) + d_t * (spv[0] - vx)
        fcy = k_t * (sp[1] - py) + d_t * (spv[1] - vy)
        fcz = k_t * (sp[2] - pz) + d_t * (spv[2] - vz)
        _contact(px, py, pz, vx, vy, vz, mu, hole, r_p, r_h, depth,
                 k_n, c_n, stick_v, &con)
        vx = vx + (dt / mass) * (fcx + con.fx)
        vy = vy + (dt / mass) * (fcy + con.fy)
        vz = vz + (dt / mass) * (fcz + con.fz)
        px = px + dt * vx
        py = py + dt * vy
        pz = pz + dt * vz
        if not lock_orientation:
            # setpoint quaternion from rotation-vector coordinates
            angle = sqrt(sp[3] * sp[3] + sp[4] * sp[4] + sp[5] * sp[5])
            if angle < 1e-12:
                n = sqrt(1.0 + 0.25 * (sp[3] * sp[3] + sp[4] * sp[4] + sp[5] * sp[5]))
                sw = 1.0 / n
                sx = 0.5 * sp[3] / n
                sy = 0.5 * sp[4] / n
                szz = 0.5 * sp[5] / n
            else:
                half = 0.5 * angle
                sfac = sin(half) / angle
                sw = cos(half)
                sx = sp[3] * sfac
                sy = sp[4] * sfac
                szz = sp[5] * sfac
            # error quaternion q_set * conj(q)
            ew = sw * qw + sx * qx + sy * qy + szz * qz
            exq = -sw * qx + sx * qw - sy * qz + szz * qy
            eyq = -sw * qy + sx * qz + sy * qw - szz * qx
            ezq = -sw * qz - sx * qy + sy * qx + szz * qw
            if ew < 0.0:
                ew = -ew; exq = -exq; eyq = -eyq; ezq = -ezq
            s_norm = sqrt(exq * exq + eyq * eyq + ezq * ezq)
            if s_norm < 1e-12:
                rex = 2.0 * exq; rey = 2.0 * eyq; rez = 2.0 * ezq
            else:
                angle = 2.0 * atan2(s_norm, ew)
                rex = exq * (angle / s_norm)
                rey = eyq * (angle / s_norm)
                rez = ezq * (angle / s_norm)
            tcx = k_r * rex + d_r * (spv[3] - ox)
            tcy = k_r * rey + d_r * (spv[4] - oy)
            tcz = k_r * rez + d_r * (spv[5] - oz)
            ox = ox + (dt / inertia) * (tcx + con.tx)
            oy = oy + (dt / inertia) * (tcy + con.ty)
            oz = oz + (dt / inertia) * (tcz + con.tz)
            dw = 0.5 * (-ox * qx - oy * qy - oz * qz)
            dx = 0.5 * (ox * qw + oy * qz - oz * qy)
            dy = 0.5 * (oy * qw + oz * qx - ox * qz)
            dz = 0.5 * (oz * qw + ox * qy - oy * qx)
            qw = qw + dw * dt
            qx = qx + dx * dt
            qy = qy + dy * dt
            qz = qz + dz * dt
            n = sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
            qw /= n; qx /= n; qy /= n; qz /= n
        if pz >= 0.0:
            hole = False
        elif not hole:
            if hypot(px, py) <= r_h - r_p:
                hole = True
    return (np.array([px, py, pz]), np.array([vx, vy, vz]),
            np.array([qw, qx, qy, qz]), np.array([ox, oy, oz]),
            bool(hole), t)

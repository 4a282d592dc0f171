"""Pure-Python closed-loop RK4 kernels (fallback for the compiled module).

Scalar code on tuples; mirrors ``_ckernels.pyx`` line for line so the two
backends agree to rounding. Matrices are row-major 9-tuples.
"""
import math

MODE_SYNC = 0
MODE_PD = 1

REF_SINE = 0
REF_ROTATION = 1

STATUS_OK = 0
STATUS_GUARD = 1
STATUS_NONFINITE = 2


def _zmat(q1, q2, q3):
    qq = q1 * q1 + q2 * q2 + q3 * q3
    d = 0.25 * (1.0 - qq)
    return (
        d + 0.5 * q1 * q1, 0.5 * (q1 * q2 - q3), 0.5 * (q1 * q3 + q2),
        0.5 * (q2 * q1 + q3), d + 0.5 * q2 * q2, 0.5 * (q2 * q3 - q1),
        0.5 * (q3 * q1 - q2), 0.5 * (q3 * q2 + q1), d + 0.5 * q3 * q3,
    )


def _zinv(q1, q2, q3):
    qq = q1 * q1 + q2 * q2 + q3 * q3
    c = 4.0 / ((1.0 + qq) * (1.0 + qq))
    e = 1.0 - qq
    return (
        c * (e + 2.0 * q1 * q1), c * (2.0 * q1 * q2 + 2.0 * q3), c * (2.0 * q1 * q3 - 2.0 * q2),
        c * (2.0 * q2 * q1 - 2.0 * q3), c * (e + 2.0 * q2 * q2), c * (2.0 * q2 * q3 + 2.0 * q1),
        c * (2.0 * q3 * q1 + 2.0 * q2), c * (2.0 * q3 * q2 - 2.0 * q1), c * (e + 2.0 * q3 * q3),
    )


def _zdot(q1, q2, q3, d1, d2, d3):
    e = -(q1 * d1 + q2 * d2 + q3 * d3)
    return (
        0.5 * (e + 2.0 * d1 * q1), 0.5 * (d1 * q2 + q1 * d2 - d3), 0.5 * (d1 * q3 + q1 * d3 + d2),
        0.5 * (d2 * q1 + q2 * d1 + d3), 0.5 * (e + 2.0 * d2 * q2), 0.5 * (d2 * q3 + q2 * d3 - d1),
        0.5 * (d3 * q1 + q3 * d1 - d2), 0.5 * (d3 * q2 + q3 * d2 + d1), 0.5 * (e + 2.0 * d3 * q3),
    )


def _mv(A, v0, v1, v2):
    return (
        A[0] * v0 + A[1] * v1 + A[2] * v2,
        A[3] * v0 + A[4] * v1 + A[5] * v2,
        A[6] * v0 + A[7] * v1 + A[8] * v2,
    )


def _mtv(A, v0, v1, v2):
    return (
        A[0] * v0 + A[3] * v1 + A[6] * v2,
        A[1] * v0 + A[4] * v1 + A[7] * v2,
        A[2] * v0 + A[5] * v1 + A[8] * v2,
    )


def _cross(a0, a1, a2, b0, b1, b2):
    return (a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0)


def _ref_channel(t, coef, kind):
    bias, amp, om, ph = coef
    if kind == REF_ROTATION:
        vd = 0.25 * om
        f = math.tan(vd * t + 0.25 * ph)
        fd = vd * (1.0 + f * f)
        return f, fd, 2.0 * vd * f * fd
    arg = om * t + ph
    sn = math.sin(arg)
    cs = math.cos(arg)
    return bias + amp * sn, amp * om * cs, -amp * om * om * sn


# ---------------------------------------------------------------------------
# attitude

def _attitude_deriv(t, X, p, ref_coef, ref_kind, J, Jinv, h, K1, K2, lam, W, mask, mode, dist, limit):
    qd = [None] * p
    pos = [None] * p
    srf = [None] * p
    qrd = [None] * p
    qrdd = [None] * p
    for i in range(p):
        x = X[i]
        Z = _zmat(x[0], x[1], x[2])
        qdot = _mv(Z, x[3], x[4], x[5])
        ps = [0.0, 0.0, 0.0]
        a1 = [0.0, 0.0, 0.0]
        a2 = [0.0, 0.0, 0.0]
        a3 = [0.0, 0.0, 0.0]
        s = [0.0, 0.0, 0.0]
        for k in range(3):
            r0, r1, r2 = _ref_channel(t, ref_coef[i][k], ref_kind[i][k])
            ps[k] = r0
            a1[k] = r1 + lam[k] * (r0 - x[k])
            a2[k] = r2 + lam[k] * (r1 - qdot[k])
            a3[k] = qdot[k] - a1[k]
            if mode == MODE_PD:
                s[k] = qdot[k] + lam[k] * (x[k] - r0)
            else:
                s[k] = a3[k]
        qd[i] = qdot
        pos[i] = ps
        qrd[i] = a1
        qrdd[i] = a2
        srf[i] = s

    dX = [None] * p
    tau_all = [None] * p
    u_all = [None] * p
    for i in range(p):
        x = X[i]
        q1, q2, q3, w1, w2, w3 = x
        Ji = J[i]
        tau = [0.0, 0.0, 0.0]
        if mode == MODE_SYNC:
            Zi = _zinv(q1, q2, q3)
            Zd = _zdot(q1, q2, q3, qd[i][0], qd[i][1], qd[i][2])
            b = _mv(Zi, qrd[i][0], qrd[i][1], qrd[i][2])
            zb = _mv(Zd, b[0], b[1], b[2])
            a = _mv(Zi, qrdd[i][0] - zb[0], qrdd[i][1] - zb[1], qrdd[i][2] - zb[2])
            Ja = _mv(Ji, a[0], a[1], a[2])
            Jw = _mv(Ji, w1, w2, w3)
            Hc = _cross(Jw[0] + h[i][0], Jw[1] + h[i][1], Jw[2] + h[i][2], b[0], b[1], b[2])
            ff = _mtv(Zi, Ja[0] - Hc[0], Ja[1] - Hc[1], Ja[2] - Hc[2])
            for k in range(3):
                tau[k] = ff[k] - K1[k] * srf[i][k]
        else:
            for k in range(3):
                tau[k] = -K1[k] * srf[i][k]
        Wi = W[i]
        for j in range(p):
            wij = Wi[j]
            if wij != 0.0:
                for k in range(3):
                    tau[k] += wij * K2[k] * mask[k] * srf[j][k]
        Z = _zmat(q1, q2, q3)
        u = list(_mtv(Z, tau[0], tau[1], tau[2]))
        lim = limit[i]
        if lim < math.inf:
            for k in range(3):
                if u[k] > lim:
                    u[k] = lim
                elif u[k] < -lim:
                    u[k] = -lim
        Jw = _mv(Ji, w1, w2, w3)
        gy = _cross(Jw[0] + h[i][0], Jw[1] + h[i][1], Jw[2] + h[i][2], w1, w2, w3)
        di = dist[i]
        wd = _mv(Jinv[i], gy[0] + u[0] + di[0], gy[1] + u[1] + di[1], gy[2] + u[2] + di[2])
        dX[i] = (qd[i][0], qd[i][1], qd[i][2], wd[0], wd[1], wd[2])
        tau_all[i] = tau
        u_all[i] = u
    return dX, tau_all, u_all, srf, pos


def _state_status(X, guard2):
    for x in X:
        for v in x:
            if not math.isfinite(v):
                return STATUS_NONFINITE
        if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] >= guard2:
            return STATUS_GUARD
    return STATUS_OK


def _rk4(deriv, t, X, dt, args):
    k1 = deriv(t, X, *args)[0]
    X2 = [tuple(x[m] + 0.5 * dt * k[m] for m in range(6)) for x, k in zip(X, k1)]
    k2 = deriv(t + 0.5 * dt, X2, *args)[0]
    X3 = [tuple(x[m] + 0.5 * dt * k[m] for m in range(6)) for x, k in zip(X, k2)]
    k3 = deriv(t + 0.5 * dt, X3, *args)[0]
    X4 = [tuple(x[m] + dt * k[m] for m in range(6)) for x, k in zip(X, k3)]
    k4 = deriv(t + dt, X4, *args)[0]
    c = dt / 6.0
    return [
        tuple(x[m] + c * (a[m] + 2.0 * b[m] + 2.0 * d[m] + e[m]) for m in range(6))
        for x, a, b, d, e in zip(X, k1, k2, k3, k4)
    ]


def _mat9(A):
    return [tuple(float(v) for v in a.reshape(9)) for a in A]


def _rows(A):
    return [tuple(float(v) for v in row) for row in A]


def attitude_advance(x, t0, dt, nsteps, ref_coef, ref_kind, J, Jinv, h, K1, K2, lam, W, mask,
                     mode, dist, limit, guard2, tau_out, u_out, s_out, ref_out):
    """Advance ``x`` (p, 6) = [q, omega] by ``nsteps`` RK4 steps in place.

    Returns ``(steps_done, status)``; outputs are evaluated at the final state.
    """
    p = x.shape[0]
    X = _rows(x)
    args = (
        p,
        [[tuple(float(c) for c in ch) for ch in craft] for craft in ref_coef],
        [[int(k) for k in craft] for craft in ref_kind],
        _mat9(J), _mat9(Jinv), _rows(h),
        tuple(float(v) for v in K1), tuple(float(v) for v in K2), tuple(float(v) for v in lam),
        _rows(W), tuple(float(v) for v in mask), int(mode), _rows(dist),
        tuple(float(v) for v in limit),
    )
    done = 0
    status = STATUS_OK
    for k in range(nsteps):
        t = t0 + k * dt
        Xn = _rk4(_attitude_deriv, t, X, dt, args)
        status = _state_status(Xn, guard2)
        if status != STATUS_OK:
            break
        X = Xn
        done += 1
    x[:, :] = X
    _, tau, u, s, pos = _attitude_deriv(t0 + done * dt, X, *args)
    tau_out[:, :] = tau
    u_out[:, :] = u
    s_out[:, :] = s
    ref_out[:, :] = pos
    return done, status


# ---------------------------------------------------------------------------
# translation

def _spiral(t, sp):
    a0, a_rate, w, conv, yb, ya, yf, yph = sp
    a = a0 + a_rate * t
    c = math.cos(w * t)
    s = math.sin(w * t)
    u0, u1 = a * c, a * s
    v0, v1 = a_rate * c - a * w * s, a_rate * s + a * w * c
    g0 = -2.0 * a_rate * w * s - a * w * w * c
    g1 = 2.0 * a_rate * w * c - a * w * w * s
    if conv != 0.0:
        u0, u1 = u1, u0
        v0, v1 = v1, v0
        g0, g1 = g1, g0
    arg = yf * t + yph
    sy = math.sin(arg)
    y = yb + ya * sy
    yd = ya * yf * math.cos(arg)
    ydd = -ya * yf * yf * sy
    return (u0, y, u1), (v0, yd, v1), (g0, ydd, g1)


def _rot_xz(c, s, v):
    # T(theta) = [[c, 0, -s], [0, 1, 0], [s, 0, c]]
    return (c * v[0] - s * v[2], v[1], s * v[0] + c * v[2])


def _j2acc(x, y, z, mu, j2, re):
    r2 = x * x + y * y + z * z
    r = math.sqrt(r2)
    k = -1.5 * j2 * mu * re * re / (r2 * r2 * r)
    zz = 5.0 * z * z / r2
    return (k * x * (1.0 - zz), k * y * (1.0 - zz), k * z * (3.0 - zz))


def _j2_force(t, r, m, R0, mu, w0, incl, phase0, j2, re):
    u = phase0 + w0 * t
    cu, su = math.cos(u), math.sin(u)
    ci, si = math.cos(incl), math.sin(incl)
    er = (cu, su * ci, su * si)
    en = (0.0, -si, ci)
    ex = _cross(er[0], er[1], er[2], en[0], en[1], en[2])
    cx, cy, cz = R0 * er[0], R0 * er[1], R0 * er[2]
    sx = cx + ex[0] * r[0] + er[0] * r[1] + en[0] * r[2]
    sy = cy + ex[1] * r[0] + er[1] * r[1] + en[1] * r[2]
    sz = cz + ex[2] * r[0] + er[2] * r[1] + en[2] * r[2]
    a_s = _j2acc(sx, sy, sz, mu, j2, re)
    a_c = _j2acc(cx, cy, cz, mu, j2, re)
    d0, d1, d2 = a_s[0] - a_c[0], a_s[1] - a_c[1], a_s[2] - a_c[2]
    return (
        m * (ex[0] * d0 + ex[1] * d1 + ex[2] * d2),
        m * (er[0] * d0 + er[1] * d1 + er[2] * d2),
        m * (en[0] * d0 + en[1] * d1 + en[2] * d2),
    )


def _translation_deriv(t, X, p, sp, rot, m, gsc, k1, k2, lam, W, R0, mu, w0, j2_on, incl, phase0,
                       j2, re, dist):
    base = _spiral(t, sp)
    qrd = [None] * p
    qrdd = [None] * p
    srf = [None] * p
    pos = [None] * p
    for i in range(p):
        x = X[i]
        c, s = rot[i]
        r0 = _rot_xz(c, s, base[0])
        r1 = _rot_xz(c, s, base[1])
        r2 = _rot_xz(c, s, base[2])
        a1 = tuple(r1[k] + lam * (r0[k] - x[k]) for k in range(3))
        a2 = tuple(r2[k] + lam * (r1[k] - x[3 + k]) for k in range(3))
        qrd[i] = a1
        qrdd[i] = a2
        srf[i] = tuple(x[3 + k] - a1[k] for k in range(3))
        pos[i] = r0
    dX = [None] * p
    F_all = [None] * p
    for i in range(p):
        x = X[i]
        mi = m[i]
        R = math.sqrt(x[0] * x[0] + (x[1] + R0) * (x[1] + R0) + x[2] * x[2])
        R3 = R * R * R
        mu3 = mu / R3
        dd = -mi * w0 * w0 + mi * mu3
        F = [
            mi * qrdd[i][0] - 2.0 * mi * w0 * qrd[i][1] + dd * x[0],
            mi * qrdd[i][1] + 2.0 * mi * w0 * qrd[i][0] + dd * x[1] + mi * (mu3 * R0 - mu / (R0 * R0)),
            mi * qrdd[i][2] + mi * mu3 * x[2],
        ]
        sc = gsc[i]
        for k in range(3):
            F[k] -= sc * k1 * srf[i][k]
        Wi = W[i]
        for j in range(p):
            wij = Wi[j]
            if wij != 0.0:
                # T(theta_i - theta_j) = T(theta_i) T(theta_j)^T
                ci, si = rot[i]
                cj, sj = rot[j]
                cd = ci * cj + si * sj
                sd = si * cj - ci * sj
                v = _rot_xz(cd, sd, srf[j])
                for k in range(3):
                    F[k] += wij * sc * k2 * v[k]
        fd = list(dist[i])
        if j2_on:
            jf = _j2_force(t, x[:3], mi, R0, mu, w0, incl, phase0, j2, re)
            for k in range(3):
                fd[k] += jf[k]
        f0 = (F[0] + fd[0]) / mi
        f1 = (F[1] + fd[1]) / mi
        f2 = (F[2] + fd[2]) / mi
        acc = (
            2.0 * w0 * x[4] + w0 * w0 * x[0] - mu3 * x[0] + f0,
            -2.0 * w0 * x[3] + w0 * w0 * x[1] - mu3 * (R0 + x[1]) + mu / (R0 * R0) + f1,
            -mu3 * x[2] + f2,
        )
        dX[i] = (x[3], x[4], x[5], acc[0], acc[1], acc[2])
        F_all[i] = F
    return dX, F_all, srf, pos


def translation_advance(x, t0, dt, nsteps, spiral, phase_off, m, gain_scale, k1, k2, lam, W,
                        R0, mu, w0, j2_on, incl, phase0, j2, re, dist, F_out, s_out, ref_out):
    """Advance ``x`` (p, 6) = [r, r_dot] by ``nsteps`` RK4 steps in place."""
    p = x.shape[0]
    X = _rows(x)
    rot = [(math.cos(th), math.sin(th)) for th in phase_off]
    args = (
        p, tuple(float(v) for v in spiral), rot,
        tuple(float(v) for v in m), tuple(float(v) for v in gain_scale),
        float(k1), float(k2), float(lam), _rows(W), float(R0), float(mu), float(w0),
        bool(j2_on), float(incl), float(phase0), float(j2), float(re), _rows(dist),
    )
    done = 0
    status = STATUS_OK
    for k in range(nsteps):
        t = t0 + k * dt
        Xn = _rk4(_translation_deriv, t, X, dt, args)
        status = _state_status(Xn, math.inf)
        if status != STATUS_OK:
            break
        X = Xn
        done += 1
    x[:, :] = X
    _, F, s, pos = _translation_deriv(t0 + done * dt, X, *args)
    F_out[:, :] = F
    s_out[:, :] = s
    ref_out[:, :] = pos
    return done, status

# cython: language_level=3
"""Compiled closed-loop RK4 kernels. Same signatures as ``_pykernels``."""
from libc.math cimport sin, cos, tan, sqrt, isfinite, INFINITY
from libc.stdlib cimport malloc, free

cdef int MODE_SYNC = 0
cdef int MODE_PD = 1
cdef int REF_ROTATION = 1
cdef int STATUS_OK = 0
cdef int STATUS_GUARD = 1
cdef int STATUS_NONFINITE = 2


cdef inline void _zmat(const double* q, double* Z) noexcept nogil:
    cdef double q1 = q[0], q2 = q[1], q3 = q[2]
    cdef double qq = q1 * q1 + q2 * q2 + q3 * q3
    cdef double d = 0.25 * (1.0 - qq)
    Z[0] = d + 0.5 * q1 * q1
    Z[1] = 0.5 * (q1 * q2 - q3)
    Z[2] = 0.5 * (q1 * q3 + q2)
    Z[3] = 0.5 * (q2 * q1 + q3)
    Z[4] = d + 0.5 * q2 * q2
    Z[5] = 0.5 * (q2 * q3 - q1)
    Z[6] = 0.5 * (q3 * q1 - q2)
    Z[7] = 0.5 * (q3 * q2 + q1)
    Z[8] = d + 0.5 * q3 * q3


cdef inline void _zinv(const double* q, double* Z) noexcept nogil:
    cdef double q1 = q[0], q2 = q[1], q3 = q[2]
    cdef double qq = q1 * q1 + q2 * q2 + q3 * q3
    cdef double c = 4.0 / ((1.0 + qq) * (1.0 + qq))
    cdef double e = 1.0 - qq
    Z[0] = c * (e + 2.0 * q1 * q1)
    Z[1] = c * (2.0 * q1 * q2 + 2.0 * q3)
    Z[2] = c * (2.0 * q1 * q3 - 2.0 * q2)
    Z[3] = c * (2.0 * q2 * q1 - 2.0 * q3)
    Z[4] = c * (e + 2.0 * q2 * q2)
    Z[5] = c * (2.0 * q2 * q3 + 2.0 * q1)
    Z[6] = c * (2.0 * q3 * q1 + 2.0 * q2)
    Z[7] = c * (2.0 * q3 * q2 - 2.0 * q1)
    Z[8] = c * (e + 2.0 * q3 * q3)


cdef inline void _zdot(const double* q, const double* d, double* Z) noexcept nogil:
    cdef double q1 = q[0], q2 = q[1], q3 = q[2]
    cdef double d1 = d[0], d2 = d[1], d3 = d[2]
    cdef double e = -(q1 * d1 + q2 * d2 + q3 * d3)
    Z[0] = 0.5 * (e + 2.0 * d1 * q1)
    Z[1] = 0.5 * (d1 * q2 + q1 * d2 - d3)
    Z[2] = 0.5 * (d1 * q3 + q1 * d3 + d2)
    Z[3] = 0.5 * (d2 * q1 + q2 * d1 + d3)
    Z[4] = 0.5 * (e + 2.0 * d2 * q2)
    Z[5] = 0.5 * (d2 * q3 + q2 * d3 - d1)
    Z[6] = 0.5 * (d3 * q1 + q3 * d1 - d2)
    Z[7] = 0.5 * (d3 * q2 + q3 * d2 + d1)
    Z[8] = 0.5 * (e + 2.0 * d3 * q3)


cdef inline void _mv(const double* A, const double* v, double* out) noexcept nogil:
    out[0] = A[0] * v[0] + A[1] * v[1] + A[2] * v[2]
    out[1] = A[3] * v[0] + A[4] * v[1] + A[5] * v[2]
    out[2] = A[6] * v[0] + A[7] * v[1] + A[8] * v[2]


cdef inline void _mtv(const double* A, const double* v, double* out) noexcept nogil:
    out[0] = A[0] * v[0] + A[3] * v[1] + A[6] * v[2]
    out[1] = A[1] * v[0] + A[4] * v[1] + A[7] * v[2]
    out[2] = A[2] * v[0] + A[5] * v[1] + A[8] * v[2]


cdef inline void _cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _ref_channel(double t, const double* coef, int kind, double* r) noexcept nogil:
    cdef double vd, f, fd, arg, sn, cs
    if kind == REF_ROTATION:
        vd = 0.25 * coef[2]
        f = tan(vd * t + 0.25 * coef[3])
        fd = vd * (1.0 + f * f)
        r[0] = f
        r[1] = fd
        r[2] = 2.0 * vd * f * fd
        return
    arg = coef[2] * t + coef[3]
    sn = sin(arg)
    cs = cos(arg)
    r[0] = coef[0] + coef[1] * sn
    r[1] = coef[1] * coef[2] * cs
    r[2] = -coef[1] * coef[2] * coef[2] * sn


# ---------------------------------------------------------------------------
# attitude

cdef struct AttParams:
    int p
    const double* ref_coef   # p*3*4
    const int* ref_kind      # p*3
    const double* J          # p*9
    const double* Jinv       # p*9
    const double* h          # p*3
    const double* K1
    const double* K2
    const double* lam
    const double* W          # p*p
    const double* mask
    int mode
    const double* dist       # p*3
    const double* limit      # p
    double* qd               # work p*3
    double* qrd
    double* qrdd
    double* srf
    double* pos


cdef void _attitude_deriv(double t, const double* X, AttParams* P, double* dX,
                          double* tau_o, double* u_o) noexcept nogil:
    cdef int p = P.p
    cdef int i, j, k
    cdef double Z[9]
    cdef double Zi[9]
    cdef double Zd[9]
    cdef double r[3]
    cdef double b[3]
    cdef double zb[3]
    cdef double tmp[3]
    cdef double a[3]
    cdef double Ja[3]
    cdef double Jw[3]
    cdef double H[3]
    cdef double Hc[3]
    cdef double ff[3]
    cdef double tau[3]
    cdef double u[3]
    cdef double gy[3]
    cdef double wd[3]
    cdef const double* x
    cdef double wij, lim
    for i in range(p):
        x = X + 6 * i
        _zmat(x, Z)
        _mv(Z, x + 3, P.qd + 3 * i)
        for k in range(3):
            _ref_channel(t, P.ref_coef + 12 * i + 4 * k, P.ref_kind[3 * i + k], r)
            P.pos[3 * i + k] = r[0]
            P.qrd[3 * i + k] = r[1] + P.lam[k] * (r[0] - x[k])
            P.qrdd[3 * i + k] = r[2] + P.lam[k] * (r[1] - P.qd[3 * i + k])
            if P.mode == MODE_PD:
                P.srf[3 * i + k] = P.qd[3 * i + k] + P.lam[k] * (x[k] - r[0])
            else:
                P.srf[3 * i + k] = P.qd[3 * i + k] - P.qrd[3 * i + k]

    for i in range(p):
        x = X + 6 * i
        if P.mode == MODE_SYNC:
            _zinv(x, Zi)
            _zdot(x, P.qd + 3 * i, Zd)
            _mv(Zi, P.qrd + 3 * i, b)
            _mv(Zd, b, zb)
            for k in range(3):
                tmp[k] = P.qrdd[3 * i + k] - zb[k]
            _mv(Zi, tmp, a)
            _mv(P.J + 9 * i, a, Ja)
            _mv(P.J + 9 * i, x + 3, Jw)
            for k in range(3):
                H[k] = Jw[k] + P.h[3 * i + k]
            _cross(H, b, Hc)
            for k in range(3):
                tmp[k] = Ja[k] - Hc[k]
            _mtv(Zi, tmp, ff)
            for k in range(3):
                tau[k] = ff[k] - P.K1[k] * P.srf[3 * i + k]
        else:
            for k in range(3):
                tau[k] = -P.K1[k] * P.srf[3 * i + k]
        for j in range(p):
            wij = P.W[p * i + j]
            if wij != 0.0:
                for k in range(3):
                    tau[k] += wij * P.K2[k] * P.mask[k] * P.srf[3 * j + k]
        _zmat(x, Z)
        _mtv(Z, tau, u)
        lim = P.limit[i]
        if lim < INFINITY:
            for k in range(3):
                if u[k] > lim:
                    u[k] = lim
                elif u[k] < -lim:
                    u[k] = -lim
        _mv(P.J + 9 * i, x + 3, Jw)
        for k in range(3):
            H[k] = Jw[k] + P.h[3 * i + k]
        _cross(H, x + 3, gy)
        for k in range(3):
            tmp[k] = gy[k] + u[k] + P.dist[3 * i + k]
        _mv(P.Jinv + 9 * i, tmp, wd)
        for k in range(3):
            dX[6 * i + k] = P.qd[3 * i + k]
            dX[6 * i + 3 + k] = wd[k]
            if tau_o != NULL:
                tau_o[3 * i + k] = tau[k]
                u_o[3 * i + k] = u[k]


cdef int _status(const double* X, int p, double guard2) noexcept nogil:
    cdef int i, m
    for i in range(p):
        for m in range(6):
            if not isfinite(X[6 * i + m]):
                return STATUS_NONFINITE
        if X[6 * i] * X[6 * i] + X[6 * i + 1] * X[6 * i + 1] + X[6 * i + 2] * X[6 * i + 2] >= guard2:
            return STATUS_GUARD
    return STATUS_OK


def attitude_advance(double[:, ::1] x, double t0, double dt, int nsteps,
                     double[:, :, ::1] ref_coef, int[:, ::1] ref_kind,
                     double[:, :, ::1] J, double[:, :, ::1] Jinv, double[:, ::1] h,
                     double[::1] K1, double[::1] K2, double[::1] lam, double[:, ::1] W,
                     double[::1] mask, int mode, double[:, ::1] dist, double[::1] limit,
                     double guard2, double[:, ::1] tau_out, double[:, ::1] u_out,
                     double[:, ::1] s_out, double[:, ::1] ref_out):
    """Advance ``x`` (p, 6) = [q, omega] by ``nsteps`` RK4 steps in place.

    Returns ``(steps_done, status)``; outputs are evaluated at the final state.
    """
    cdef int p = x.shape[0]
    cdef int n = 6 * p
    cdef AttParams P
    cdef double* buf = <double*> malloc(sizeof(double) * (7 * n + 15 * p))
    if buf == NULL:
        raise MemoryError()
    cdef double* X = buf
    cdef double* Xs = buf + n
    cdef double* k1 = buf + 2 * n
    cdef double* k2 = buf + 3 * n
    cdef double* k3 = buf + 4 * n
    cdef double* k4 = buf + 5 * n
    cdef double* Xn = buf + 6 * n
    cdef int i, m, step, done = 0, status = STATUS_OK
    cdef double t, c
    P.p = p
    P.ref_coef = &ref_coef[0, 0, 0]
    P.ref_kind = &ref_kind[0, 0]
    P.J = &J[0, 0, 0]
    P.Jinv = &Jinv[0, 0, 0]
    P.h = &h[0, 0]
    P.K1 = &K1[0]
    P.K2 = &K2[0]
    P.lam = &lam[0]
    P.W = &W[0, 0]
    P.mask = &mask[0]
    P.mode = mode
    P.dist = &dist[0, 0]
    P.limit = &limit[0]
    P.qd = buf + 7 * n
    P.qrd = P.qd + 3 * p
    P.qrdd = P.qd + 6 * p
    P.srf = P.qd + 9 * p
    P.pos = P.qd + 12 * p
    try:
        with nogil:
            for i in range(p):
                for m in range(6):
                    X[6 * i + m] = x[i, m]
            c = dt / 6.0
            for step in range(nsteps):
                t = t0 + step * dt
                _attitude_deriv(t, X, &P, k1, NULL, NULL)
                for i in range(n):
                    Xs[i] = X[i] + 0.5 * dt * k1[i]
                _attitude_deriv(t + 0.5 * dt, Xs, &P, k2, NULL, NULL)
                for i in range(n):
                    Xs[i] = X[i] + 0.5 * dt * k2[i]
                _attitude_deriv(t + 0.5 * dt, Xs, &P, k3, NULL, NULL)
                for i in range(n):
                    Xs[i] = X[i] + dt * k3[i]
                _attitude_deriv(t + dt, Xs, &P, k4, NULL, NULL)
                for i in range(n):
                    Xn[i] = X[i] + c * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                status = _status(Xn, p, guard2)
                if status != STATUS_OK:
                    break
                for i in range(n):
                    X[i] = Xn[i]
                done += 1
            for i in range(p):
                for m in range(6):
                    x[i, m] = X[6 * i + m]
            _attitude_deriv(t0 + done * dt, X, &P, k1, &tau_out[0, 0], &u_out[0, 0])
            for i in range(p):
                for m in range(3):
                    s_out[i, m] = P.srf[3 * i + m]
                    ref_out[i, m] = P.pos[3 * i + m]
    finally:
        free(buf)
    return done, status


# ---------------------------------------------------------------------------
# translation

cdef struct TrParams:
    int p
    double sp[8]
    const double* rot       # p*2 (cos, sin)
    const double* m
    const double* gsc
    double k1
    double k2
    double lam
    const double* W
    double R0
    double mu
    double w0
    int j2_on
    double incl
    double phase0
    double j2
    double re
    const double* dist
    double* qrd
    double* qrdd
    double* srf
    double* pos


cdef inline void _rot_xz(double c, double s, const double* v, double* out) noexcept nogil:
    out[0] = c * v[0] - s * v[2]
    out[1] = v[1]
    out[2] = s * v[0] + c * v[2]


cdef void _spiral(double t, const double* sp, double* r0, double* r1, double* r2) noexcept nogil:
    cdef double a0 = sp[0], a_rate = sp[1], w = sp[2]
    cdef double a = a0 + a_rate * t
    cdef double c = cos(w * t)
    cdef double s = sin(w * t)
    cdef double u0 = a * c, u1 = a * s
    cdef double v0 = a_rate * c - a * w * s, v1 = a_rate * s + a * w * c
    cdef double g0 = -2.0 * a_rate * w * s - a * w * w * c
    cdef double g1 = 2.0 * a_rate * w * c - a * w * w * s
    cdef double tmp, arg, sy
    if sp[3] != 0.0:
        tmp = u0; u0 = u1; u1 = tmp
        tmp = v0; v0 = v1; v1 = tmp
        tmp = g0; g0 = g1; g1 = tmp
    arg = sp[6] * t + sp[7]
    sy = sin(arg)
    r0[0] = u0
    r0[1] = sp[4] + sp[5] * sy
    r0[2] = u1
    r1[0] = v0
    r1[1] = sp[5] * sp[6] * cos(arg)
    r1[2] = v1
    r2[0] = g0
    r2[1] = -sp[5] * sp[6] * sp[6] * sy
    r2[2] = g1


cdef inline void _j2acc(double x, double y, double z, double mu, double j2, double re,
                        double* out) noexcept nogil:
    cdef double r2 = x * x + y * y + z * z
    cdef double r = sqrt(r2)
    cdef double k = -1.5 * j2 * mu * re * re / (r2 * r2 * r)
    cdef double zz = 5.0 * z * z / r2
    out[0] = k * x * (1.0 - zz)
    out[1] = k * y * (1.0 - zz)
    out[2] = k * z * (3.0 - zz)


cdef void _j2_force(double t, const double* r, double m, TrParams* P, double* out) noexcept nogil:
    cdef double u = P.phase0 + P.w0 * t
    cdef double cu = cos(u), su = sin(u)
    cdef double ci = cos(P.incl), si = sin(P.incl)
    cdef double er[3]
    cdef double en[3]
    cdef double ex[3]
    cdef double a_s[3]
    cdef double a_c[3]
    cdef double cx, cy, cz, sx, sy, sz, d0, d1, d2
    er[0] = cu; er[1] = su * ci; er[2] = su * si
    en[0] = 0.0; en[1] = -si; en[2] = ci
    _cross(er, en, ex)
    cx = P.R0 * er[0]; cy = P.R0 * er[1]; cz = P.R0 * er[2]
    sx = cx + ex[0] * r[0] + er[0] * r[1] + en[0] * r[2]
    sy = cy + ex[1] * r[0] + er[1] * r[1] + en[1] * r[2]
    sz = cz + ex[2] * r[0] + er[2] * r[1] + en[2] * r[2]
    _j2acc(sx, sy, sz, P.mu, P.j2, P.re, a_s)
    _j2acc(cx, cy, cz, P.mu, P.j2, P.re, a_c)
    d0 = a_s[0] - a_c[0]
    d1 = a_s[1] - a_c[1]
    d2 = a_s[2] - a_c[2]
    out[0] = m * (ex[0] * d0 + ex[1] * d1 + ex[2] * d2)
    out[1] = m * (er[0] * d0 + er[1] * d1 + er[2] * d2)
    out[2] = m * (en[0] * d0 + en[1] * d1 + en[2] * d2)


cdef void _translation_deriv(double t, const double* X, TrParams* P, double* dX,
                             double* F_o) noexcept nogil:
    cdef int p = P.p
    cdef int i, j, k
    cdef double b0[3]
    cdef double b1[3]
    cdef double b2[3]
    cdef double r0[3]
    cdef double r1[3]
    cdef double r2[3]
    cdef double F[3]
    cdef double fd[3]
    cdef double jf[3]
    cdef double v[3]
    cdef const double* x
    cdef double mi, R, R3, mu3, dd, sc, wij, ci, si, cj, sj, cd, sd, w0 = P.w0, R0 = P.R0, mu = P.mu
    _spiral(t, P.sp, b0, b1, b2)
    for i in range(p):
        x = X + 6 * i
        ci = P.rot[2 * i]
        si = P.rot[2 * i + 1]
        _rot_xz(ci, si, b0, r0)
        _rot_xz(ci, si, b1, r1)
        _rot_xz(ci, si, b2, r2)
        for k in range(3):
            P.qrd[3 * i + k] = r1[k] + P.lam * (r0[k] - x[k])
            P.qrdd[3 * i + k] = r2[k] + P.lam * (r1[k] - x[3 + k])
            P.srf[3 * i + k] = x[3 + k] - P.qrd[3 * i + k]
            P.pos[3 * i + k] = r0[k]
    for i in range(p):
        x = X + 6 * i
        mi = P.m[i]
        R = sqrt(x[0] * x[0] + (x[1] + R0) * (x[1] + R0) + x[2] * x[2])
        R3 = R * R * R
        mu3 = mu / R3
        dd = -mi * w0 * w0 + mi * mu3
        F[0] = mi * P.qrdd[3 * i] - 2.0 * mi * w0 * P.qrd[3 * i + 1] + dd * x[0]
        F[1] = mi * P.qrdd[3 * i + 1] + 2.0 * mi * w0 * P.qrd[3 * i] + dd * x[1] + mi * (mu3 * R0 - mu / (R0 * R0))
        F[2] = mi * P.qrdd[3 * i + 2] + mi * mu3 * x[2]
        sc = P.gsc[i]
        for k in range(3):
            F[k] -= sc * P.k1 * P.srf[3 * i + k]
        for j in range(p):
            wij = P.W[p * i + j]
            if wij != 0.0:
                ci = P.rot[2 * i]
                si = P.rot[2 * i + 1]
                cj = P.rot[2 * j]
                sj = P.rot[2 * j + 1]
                cd = ci * cj + si * sj
                sd = si * cj - ci * sj
                _rot_xz(cd, sd, P.srf + 3 * j, v)
                for k in range(3):
                    F[k] += wij * sc * P.k2 * v[k]
        for k in range(3):
            fd[k] = P.dist[3 * i + k]
        if P.j2_on:
            _j2_force(t, x, mi, P, jf)
            for k in range(3):
                fd[k] += jf[k]
        dX[6 * i] = x[3]
        dX[6 * i + 1] = x[4]
        dX[6 * i + 2] = x[5]
        dX[6 * i + 3] = 2.0 * w0 * x[4] + w0 * w0 * x[0] - mu3 * x[0] + (F[0] + fd[0]) / mi
        dX[6 * i + 4] = -2.0 * w0 * x[3] + w0 * w0 * x[1] - mu3 * (R0 + x[1]) + mu / (R0 * R0) + (F[1] + fd[1]) / mi
        dX[6 * i + 5] = -mu3 * x[2] + (F[2] + fd[2]) / mi
        if F_o != NULL:
            for k in range(3):
                F_o[3 * i + k] = F[k]


def translation_advance(double[:, ::1] x, double t0, double dt, int nsteps, double[::1] spiral,
                        double[::1] phase_off, double[::1] m, double[::1] gain_scale,
                        double k1, double k2, double lam, double[:, ::1] W,
                        double R0, double mu, double w0, bint j2_on, double incl, double phase0,
                        double j2, double re, double[:, ::1] dist,
                        double[:, ::1] F_out, double[:, ::1] s_out, double[:, ::1] ref_out):
    """Advance ``x`` (p, 6) = [r, r_dot] by ``nsteps`` RK4 steps in place."""
    cdef int p = x.shape[0]
    cdef int n = 6 * p
    cdef TrParams P
    cdef double* buf = <double*> malloc(sizeof(double) * (7 * n + 14 * p))
    if buf == NULL:
        raise MemoryError()
    cdef double* X = buf
    cdef double* Xs = buf + n
    cdef double* kk1 = buf + 2 * n
    cdef double* kk2 = buf + 3 * n
    cdef double* kk3 = buf + 4 * n
    cdef double* kk4 = buf + 5 * n
    cdef double* Xn = buf + 6 * n
    cdef double* rot = buf + 7 * n
    cdef int i, mm, step, done = 0, status = STATUS_OK
    cdef double t, c
    P.p = p
    for i in range(8):
        P.sp[i] = spiral[i]
    for i in range(p):
        rot[2 * i] = cos(phase_off[i])
        rot[2 * i + 1] = sin(phase_off[i])
    P.rot = rot
    P.m = &m[0]
    P.gsc = &gain_scale[0]
    P.k1 = k1
    P.k2 = k2
    P.lam = lam
    P.W = &W[0, 0]
    P.R0 = R0
    P.mu = mu
    P.w0 = w0
    P.j2_on = j2_on
    P.incl = incl
    P.phase0 = phase0
    P.j2 = j2
    P.re = re
    P.dist = &dist[0, 0]
    P.qrd = rot + 2 * p
    P.qrdd = P.qrd + 3 * p
    P.srf = P.qrd + 6 * p
    P.pos = P.qrd + 9 * p
    try:
        with nogil:
            for i in range(p):
                for mm in range(6):
                    X[6 * i + mm] = x[i, mm]
            c = dt / 6.0
            for step in range(nsteps):
                t = t0 + step * dt
                _translation_deriv(t, X, &P, kk1, NULL)
                for i in range(n):
                    Xs[i] = X[i] + 0.5 * dt * kk1[i]
                _translation_deriv(t + 0.5 * dt, Xs, &P, kk2, NULL)
                for i in range(n):
                    Xs[i] = X[i] + 0.5 * dt * kk2[i]
                _translation_deriv(t + 0.5 * dt, Xs, &P, kk3, NULL)
                for i in range(n):
                    Xs[i] = X[i] + dt * kk3[i]
                _translation_deriv(t + dt, Xs, &P, kk4, NULL)
                for i in range(n):
                    Xn[i] = X[i] + c * (kk1[i] + 2.0 * kk2[i] + 2.0 * kk3[i] + kk4[i])
                status = _status(Xn, p, INFINITY)
                if status != STATUS_OK:
                    break
                for i in range(n):
                    X[i] = Xn[i]
                done += 1
            for i in range(p):
                for mm in range(6):
                    x[i, mm] = X[6 * i + mm]
            _translation_deriv(t0 + done * dt, X, &P, kk1, &F_out[0, 0])
            for i in range(p):
                for mm in range(3):
                    s_out[i, mm] = P.srf[3 * i + mm]
                    ref_out[i, mm] = P.pos[3 * i + mm]
    finally:
        free(buf)
    return done, status

# Compiled versions of the loops in _kernels_py; results must agree to roundoff.

import numpy as np

cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, fmod, isfinite, nextafter, INFINITY

cnp.import_array()

cdef double SQRT3 = sqrt(3.0)
cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586


cdef inline double _w_rhs(double r, double w) nogil:
    cdef double t = sqrt(1.0 + w * w)
    return (2.0 * w * w * w + 2.0 * w - SQRT3 * t * t * t) / r


cdef inline double _rk4(double r, double w, double h) nogil:
    cdef double k1 = _w_rhs(r, w)
    cdef double k2 = _w_rhs(r + 0.5 * h, w + 0.5 * h * k1)
    cdef double k3 = _w_rhs(r + 0.5 * h, w + 0.5 * h * k2)
    cdef double k4 = _w_rhs(r + h, w + h * k3)
    return w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


cdef inline double _ulp(double x) nogil:
    return nextafter(fabs(x), INFINITY) - fabs(x)


def rk4_w(double r_start, double w_start, double r_end, double h, double err_guard, double blowup):
    cdef list rs = [r_start]
    cdef list ws = [w_start]
    cdef double r = r_start, w = w_start, step = h, hs, w1, wm, w2, err, dw
    cdef double max_err = 0.0, r_fail = float("nan")
    cdef int status = 0, halvings = 0
    cdef bint adaptive
    while r < r_end and status == 0:
        hs = min(step, r_end - r)
        adaptive = step < h
        while True:
            w1 = _rk4(r, w, hs)
            dw = fabs(w1 - w)
            if not isfinite(w1) or dw >= 0.1 * max(fabs(w), 1.0):
                hs *= 0.5
                adaptive = True
                halvings += 1
                if hs < 64.0 * _ulp(r):
                    status = 1
                    break
                continue
            wm = _rk4(r, w, 0.5 * hs)
            w2 = _rk4(r + 0.5 * hs, wm, 0.5 * hs)
            err = fabs(w2 - w1) / 15.0
            if err > err_guard * max(1.0, fabs(w)):
                if adaptive:
                    hs *= 0.5
                    halvings += 1
                    if hs < 64.0 * _ulp(r):
                        status = 1
                        break
                    continue
                max_err = err
                r_fail = r
                status = 2
                break
            max_err = max(max_err, err)
            break
        if status != 0:
            break
        r = r + hs if r_end - r > hs else r_end
        w = w2
        rs.append(r)
        ws.append(w)
        if fabs(w) > blowup:
            status = 1
            break
        step = min(h, 2.0 * hs) if adaptive else h
    return np.array(rs), np.array(ws), status, {"err": max_err, "r_fail": r_fail, "halvings": halvings}


cdef inline double _wrap(double d) nogil:
    # same convention as numpy mod: result in [-pi, pi)
    cdef double t = fmod(d + PI, TWO_PI)
    if t < 0:
        t += TWO_PI
    return t - PI


cdef struct Coef:
    double lam1, lam2, lam3, l21, l31, l41, l43
    double b0, b1, b2, b3


cdef inline Coef _coef(double r, double phi, double th, double al, double H) nogil:
    cdef Coef k
    cdef double s = sin(th - phi), c = cos(th - phi)
    cdef double sig = s * H / 3.0 + 2.0 * c * al
    cdef double eta = 2.0 * s * H / 3.0 + 2.0 * c * al
    cdef double ca = c * al, ss = s * sig * eta
    cdef double p0 = al * al, p1 = -2.0 * al * al
    cdef double p2 = -4.0 * al * al * al - al * H * H, p3 = -al * H * H
    k.lam1 = (-c * H / 3.0 + 2.0 * s * al) / (r * sig)
    k.lam2 = -c / (s * r)
    k.lam3 = (-2.0 * c * H / 3.0 + 2.0 * s * al) / (r * eta)
    k.l21 = -al * H / 3.0 / (s * r * sig)
    k.l31 = -10.0 * H * al * al / 3.0 / (r * sig * eta)
    k.l41 = (4.0 * s * al * al * H * H / 3.0 + 2.0 * c * al * al * al * H / 3.0) / (s * r * sig * eta)
    k.l43 = -2.0 * al * H / 3.0 / (s * r * eta)
    k.b0 = (p0 - p1) / sig
    k.b1 = (ca * p0 + (sig - ca) * p1) / (s * sig)
    k.b2 = (10.0 * ca * al * p0 + (8.0 * sig * al - 10.0 * ca * al) * p1) / (sig * eta) - (p2 + p3) / eta
    k.b3 = (
        (-6.0 * eta * ca * al + 10.0 * ca * ca * al) * p0
        + (8.0 * sig * ca * al - 10.0 * ca * ca * al - 6.0 * sig * eta * al + 6.0 * eta * ca * al) * p1
    ) / ss + ((eta - ca) * p2 - ca * p3) / (s * eta)
    return k


cdef inline void _rhs(Coef k, double d0, double d1, double d2, double d3, double dphi, double* out) nogil:
    # a d / dphi + b
    out[0] = k.lam1 * d0 / dphi + k.b0
    out[1] = (k.l21 * d0 + k.lam2 * d1) / dphi + k.b1
    out[2] = (k.l31 * d0 + k.lam3 * d2) / dphi + k.b2
    out[3] = (k.l41 * d0 + k.l43 * d2 + k.lam2 * d3) / dphi + k.b3


def lw_step(double r, double dr, cnp.ndarray[cnp.float64_t, ndim=1] phi, double dphi,
            cnp.ndarray[cnp.float64_t, ndim=2] U):
    cdef Py_ssize_t n = U.shape[0], j, jp, jm, q
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Uh = np.empty((n, 4))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 4))
    cdef double d[4]
    cdef double bar[4]
    cdef double f[4]
    cdef Coef k
    for j in range(n):
        jp = j + 1 if j + 1 < n else 0
        for q in range(4):
            d[q] = U[jp, q] - U[j, q]
        d[0] = _wrap(d[0])
        for q in range(4):
            bar[q] = U[j, q] + 0.5 * d[q]
        k = _coef(r, phi[j] + 0.5 * dphi, bar[0], bar[1], bar[2])
        _rhs(k, d[0], d[1], d[2], d[3], dphi, f)
        for q in range(4):
            Uh[j, q] = bar[q] - 0.5 * dr * f[q]
    for j in range(n):
        jm = j - 1 if j > 0 else n - 1
        for q in range(4):
            d[q] = Uh[j, q] - Uh[jm, q]
        d[0] = _wrap(d[0])
        for q in range(4):
            bar[q] = Uh[jm, q] + 0.5 * d[q]
        k = _coef(r + 0.5 * dr, phi[j], bar[0], bar[1], bar[2])
        _rhs(k, d[0], d[1], d[2], d[3], dphi, f)
        for q in range(4):
            out[j, q] = U[j, q] - dr * f[q]
    return out


cdef inline void _project(double al, double H, double* d, double* w) nogil:
    w[0] = d[0]
    w[1] = H / 6.0 * d[0] + d[1]
    w[2] = 5.0 * al * d[0] + d[2]
    w[3] = -al * H / 6.0 * d[0] + H / 3.0 * d[2] + d[3]


def upwind_step(double r, double dr, cnp.ndarray[cnp.float64_t, ndim=1] phi, double dphi,
                cnp.ndarray[cnp.float64_t, ndim=2] U):
    cdef Py_ssize_t n = U.shape[0], j, jp, jm, q
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, 4))
    cdef double db[4]
    cdef double df[4]
    cdef double wb[4]
    cdef double wf[4]
    cdef double v[4]
    cdef double lam[4]
    cdef double al, H, sgn = 1.0 if dr > 0 else -1.0
    cdef Coef k
    for j in range(n):
        jp = j + 1 if j + 1 < n else 0
        jm = j - 1 if j > 0 else n - 1
        for q in range(4):
            db[q] = U[j, q] - U[jm, q]
            df[q] = U[jp, q] - U[j, q]
        db[0] = _wrap(db[0])
        df[0] = _wrap(df[0])
        al = U[j, 1]
        H = U[j, 2]
        k = _coef(r, phi[j], U[j, 0], al, H)
        _project(al, H, db, wb)
        _project(al, H, df, wf)
        lam[0] = k.lam1
        lam[1] = k.lam2
        lam[2] = k.lam3
        lam[3] = k.lam2
        for q in range(4):
            v[q] = lam[q] * (wb[q] if lam[q] * sgn > 0 else wf[q])
        out[j, 0] = U[j, 0] - dr * (v[0] / dphi + k.b0)
        out[j, 1] = U[j, 1] - dr * ((-H / 6.0 * v[0] + v[1]) / dphi + k.b1)
        out[j, 2] = U[j, 2] - dr * ((-5.0 * al * v[0] + v[2]) / dphi + k.b2)
        out[j, 3] = U[j, 3] - dr * ((11.0 * al * H / 6.0 * v[0] - H / 3.0 * v[2] + v[3]) / dphi + k.b3)
    return out


def level_diagnostics(double r, cnp.ndarray[cnp.float64_t, ndim=1] phi,
                      cnp.ndarray[cnp.float64_t, ndim=2] U):
    cdef Py_ssize_t n = U.shape[0], j
    cdef double s, c, al, H, sig, eta, det, normA, l1, l2, l3, sp
    cdef double speed = 0.0, ratio = INFINITY, smin = INFINITY, amin = INFINITY
    cdef bint nan_seen = False
    for j in range(n):
        s = sin(U[j, 0] - phi[j])
        c = cos(U[j, 0] - phi[j])
        al = U[j, 1]
        H = U[j, 2]
        sig = s * H / 3.0 + 2.0 * c * al
        eta = 2.0 * s * H / 3.0 + 2.0 * c * al
        det = s * s * sig * eta
        normA = sqrt(
            (s * H / 3.0 + c * al) ** 2
            + 5.0 * s * s
            + c * c * al * al
            + 36.0 * s * s * al * al
            + c * c * al * al
            + 4.0 * c * c * al ** 4
            + 4.0 * s * s * al * al
            + (2.0 * s * H / 3.0 + c * al) ** 2
        )
        l1 = fabs((-c * H / 3.0 + 2.0 * s * al) / (r * sig))
        l2 = fabs(-c / (s * r))
        l3 = fabs((-2.0 * c * H / 3.0 + 2.0 * s * al) / (r * eta))
        sp = max(l1, max(l2, l3))
        if not isfinite(sp):
            nan_seen = True
        else:
            speed = max(speed, sp)
        ratio = min(ratio, fabs(det) / (1.0 + normA))
        smin = min(smin, fabs(s))
        amin = min(amin, fabs(al))
    if nan_seen:
        speed = float("nan")
    return speed, ratio, smin, amin

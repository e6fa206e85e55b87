# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) kernel for the three magnetic flows.

Same algorithm and step-size controller as ``_dopri_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, pow, fmax, fmin
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    AMBIENT = 0
    SPHERE = 1
    PENDULUM = 2

cdef double C_A21 = 1.0 / 5
cdef double C_A31 = 3.0 / 40, C_A32 = 9.0 / 40
cdef double C_A41 = 44.0 / 45, C_A42 = -56.0 / 15, C_A43 = 32.0 / 9
cdef double C_A51 = 19372.0 / 6561, C_A52 = -25360.0 / 2187, C_A53 = 64448.0 / 6561, C_A54 = -212.0 / 729
cdef double C_A61 = 9017.0 / 3168, C_A62 = -355.0 / 33, C_A63 = 46732.0 / 5247, C_A64 = 49.0 / 176, C_A65 = -5103.0 / 18656
cdef double C_A71 = 35.0 / 384, C_A73 = 500.0 / 1113, C_A74 = 125.0 / 192, C_A75 = -2187.0 / 6784, C_A76 = 11.0 / 84
cdef double C_E1 = 71.0 / 57600, C_E3 = -71.0 / 16695, C_E4 = 71.0 / 1920
cdef double C_E5 = -17253.0 / 339200, C_E6 = 22.0 / 525, C_E7 = -1.0 / 40


cdef struct Flow:
    int kind
    int n
    double *sk      # (s/m) * kappa, row-major n x n
    double inv_m
    double s
    double b[3]


cdef void rhs(Flow *f, double *y, double *out) nogil:
    cdef int n = f.n
    cdef int i, j
    cdef double acc, mu, pp, kpg, lam, bg
    cdef double *g = y
    cdef double *p = y + n
    if f.kind == PENDULUM:
        pp = p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
        bg = f.b[0] * g[0] + f.b[1] * g[1] + f.b[2] * g[2]
        lam = pp + bg
        out[0] = p[0]
        out[1] = p[1]
        out[2] = p[2]
        out[3] = f.s * (g[1] * p[2] - g[2] * p[1]) + f.b[0] - lam * g[0]
        out[4] = f.s * (g[2] * p[0] - g[0] * p[2]) + f.b[1] - lam * g[1]
        out[5] = f.s * (g[0] * p[1] - g[1] * p[0]) + f.b[2] - lam * g[2]
        return
    pp = 0.0
    kpg = 0.0
    for i in range(n):
        out[i] = p[i] * f.inv_m
        acc = 0.0
        for j in range(n):
            acc += f.sk[i * n + j] * p[j]
        out[n + i] = acc
        kpg += acc * g[i]
        pp += p[i] * p[i]
    if f.kind == SPHERE:
        mu = -kpg - pp * f.inv_m
        for i in range(n):
            out[n + i] += mu * g[i]


cdef inline void project(double *y, int n) nogil:
    cdef int i
    cdef double nrm = 0.0, pg = 0.0
    for i in range(n):
        nrm += y[i] * y[i]
    nrm = sqrt(nrm)
    for i in range(n):
        y[i] /= nrm
    for i in range(n):
        pg += y[n + i] * y[i]
    for i in range(n):
        y[n + i] -= pg * y[i]


cdef double rms_scaled(double *v, double *scale, int d) nogil:
    cdef int i
    cdef double acc = 0.0, x
    for i in range(d):
        x = v[i] / scale[i]
        acc += x * x
    return sqrt(acc / d)


cdef double max_scaled(double *v, double *scale, int d) nogil:
    cdef int i
    cdef double acc = 0.0
    for i in range(d):
        acc = fmax(acc, fabs(v[i]) / scale[i])
    return acc


def dopri5(int kind, y0, double t0, double t1, double rtol, double atol,
           kappa, double s, double m, b, bint project_steps,
           long max_steps=10_000_000, double h_min=1e-14):
    """Integrate from t0 to t1; returns (times, states, status, nfev)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y_in = np.ascontiguousarray(y0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] kap = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef int d = y_in.shape[0]
    cdef int n = d // 2
    cdef int i, j
    cdef Flow f
    cdef double *work = <double *> malloc(sizeof(double) * (12 * d + n * n))
    if work == NULL:
        raise MemoryError()
    cdef double *y = work
    cdef double *ynew = work + d
    cdef double *tmp = work + 2 * d
    cdef double *k1 = work + 3 * d
    cdef double *k2 = work + 4 * d
    cdef double *k3 = work + 5 * d
    cdef double *k4 = work + 6 * d
    cdef double *k5 = work + 7 * d
    cdef double *k6 = work + 8 * d
    cdef double *k7 = work + 9 * d
    cdef double *errv = work + 10 * d
    cdef double *scale = work + 11 * d
    f.sk = work + 12 * d
    f.kind = kind
    f.n = n
    f.inv_m = 1.0 / m
    f.s = s
    bl = list(b) if b is not None else [0.0, 0.0, 0.0]
    for i in range(3):
        f.b[i] = bl[i] if i < len(bl) else 0.0
    for i in range(n):
        for j in range(n):
            f.sk[i * n + j] = (s / m) * kap[i, j]
    for i in range(d):
        y[i] = y_in[i]

    times = [t0]
    states = [y_in.copy()]
    cdef double direction = 1.0 if t1 >= t0 else -1.0
    cdef double span = fabs(t1 - t0)
    cdef long nfev = 0
    cdef int status = 0
    cdef long steps = 0
    cdef double h, hh, hs, err, fac, done = 0.0, d0, d1, d2, h0, t
    cdef bint last
    cdef cnp.ndarray[cnp.float64_t, ndim=1] row

    try:
        if span == 0:
            return np.array(times), np.array(states), 0, 0
        rhs(&f, y, k1)
        nfev = 1
        # initial step (Hairer, Norsett & Wanner)
        for i in range(d):
            scale[i] = atol + rtol * fabs(y[i])
        d0 = rms_scaled(y, scale, d)
        d1 = rms_scaled(k1, scale, d)
        if d0 < 1e-5 or d1 < 1e-5:
            h0 = 1e-6
        else:
            h0 = 0.01 * d0 / d1
        for i in range(d):
            tmp[i] = y[i] + direction * h0 * k1[i]
        rhs(&f, tmp, k2)
        nfev += 1
        for i in range(d):
            errv[i] = k2[i] - k1[i]
        d2 = rms_scaled(errv, scale, d) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h = fmax(1e-6, h0 * 1e-3)
        else:
            h = pow(0.01 / fmax(d1, d2), 0.2)
        h = fmin(100 * h0, h)

        while done < span:
            if steps >= max_steps:
                status = 2
                break
            if h < h_min:
                status = 1
                break
            last = done + h >= span
            hh = span - done if last else h
            hs = direction * hh
            with nogil:
                for i in range(d):
                    tmp[i] = y[i] + hs * (C_A21 * k1[i])
                rhs(&f, tmp, k2)
                for i in range(d):
                    tmp[i] = y[i] + hs * (C_A31 * k1[i] + C_A32 * k2[i])
                rhs(&f, tmp, k3)
                for i in range(d):
                    tmp[i] = y[i] + hs * (C_A41 * k1[i] + C_A42 * k2[i] + C_A43 * k3[i])
                rhs(&f, tmp, k4)
                for i in range(d):
                    tmp[i] = y[i] + hs * (C_A51 * k1[i] + C_A52 * k2[i] + C_A53 * k3[i] + C_A54 * k4[i])
                rhs(&f, tmp, k5)
                for i in range(d):
                    tmp[i] = y[i] + hs * (C_A61 * k1[i] + C_A62 * k2[i] + C_A63 * k3[i] + C_A64 * k4[i] + C_A65 * k5[i])
                rhs(&f, tmp, k6)
                for i in range(d):
                    ynew[i] = y[i] + hs * (C_A71 * k1[i] + C_A73 * k3[i] + C_A74 * k4[i] + C_A75 * k5[i] + C_A76 * k6[i])
                rhs(&f, ynew, k7)
                for i in range(d):
                    errv[i] = hs * (C_E1 * k1[i] + C_E3 * k3[i] + C_E4 * k4[i] + C_E5 * k5[i] + C_E6 * k6[i] + C_E7 * k7[i])
                    scale[i] = atol + rtol * fmax(fabs(y[i]), fabs(ynew[i]))
                err = max_scaled(errv, scale, d)
            nfev += 6
            if err <= 1.0:
                steps += 1
                done = span if last else done + hh
                t = t0 + direction * done
                for i in range(d):
                    y[i] = ynew[i]
                if project_steps:
                    project(y, n)
                    rhs(&f, y, k1)
                    nfev += 1
                else:
                    for i in range(d):
                        k1[i] = k7[i]
                row = np.empty(d)
                for i in range(d):
                    row[i] = y[i]
                times.append(t)
                states.append(row)
                if err == 0:
                    fac = 10.0
                else:
                    fac = fmin(10.0, fmax(0.2, 0.9 * pow(err, -0.2)))
                if not last:
                    h = hh * fac
            else:
                h = hh * fmax(0.2, 0.9 * pow(err, -0.2))
        return np.array(times), np.array(states), status, nfev
    finally:
        free(work)

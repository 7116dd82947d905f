# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel for trajectory tracing.

Integrates dx/ds = exp(i theta) / sqrt(Q(x)) with an embedded Dormand-Prince
5(4) pair, where Q = num / den is given by ascending coefficient arrays and
the branch of the square root is continued from step to step. The signature
and return value match ``hyperbps._trace_py.trace_kernel``.
"""

import numpy as np

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double cabs(double complex)
    double complex cexp(double complex)
    double creal(double complex)
    double cimag(double complex)
    double complex conj(double complex)

cdef extern from "math.h" nogil:
    double fmin(double, double)
    double fmax(double, double)
    double pow(double, double)

cdef enum:
    LENGTH_CAP = 0
    STOP = 1
    ESCAPE = 2
    LOOP = 3
    UNDERFLOW = 4

# Dormand-Prince tableau
cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200
cdef double E6 = 22.0 / 525, E7 = -1.0 / 40

# 4-point Gauss-Legendre on [0, 1]
cdef double GX0 = 0.5 - 0.8611363115940526 / 2, GX1 = 0.5 - 0.3399810435848563 / 2
cdef double GX2 = 0.5 + 0.3399810435848563 / 2, GX3 = 0.5 + 0.8611363115940526 / 2
cdef double GW0 = 0.3478548451374538 / 2, GW1 = 0.6521451548625461 / 2


cdef inline double complex horner(const double complex[:] c, double complex x) noexcept nogil:
    cdef Py_ssize_t k = c.shape[0] - 1
    cdef double complex acc = c[k]
    while k > 0:
        k -= 1
        acc = acc * x + c[k]
    return acc


cdef inline double complex branch_sqrt(const double complex[:] num, const double complex[:] den,
                                       double complex x, double complex ref) noexcept nogil:
    cdef double complex r = csqrt(horner(num, x) / horner(den, x))
    if cabs(r - ref) > cabs(r + ref):
        r = -r
    return r


cdef inline double seg_dist(double complex p, double complex a, double complex b, double complex* q) noexcept nogil:
    cdef double complex d = b - a
    cdef double dd = creal(d) * creal(d) + cimag(d) * cimag(d)
    cdef double t = 0.0
    if dd > 0:
        t = creal(conj(d) * (p - a)) / dd
        t = fmin(1.0, fmax(0.0, t))
    q[0] = a + t * d
    return cabs(p - q[0])


def trace_kernel(const double complex[:] num, const double complex[:] den,
                 double complex x0, double complex sq0, double theta,
                 double h0, double tol, long max_steps, double max_length,
                 double escape_radius,
                 const double complex[:] stop_pts, const double[:] stop_radii,
                 const double complex[:] targets, const double complex[:] crit,
                 double loop_radius, double loop_min_length):
    cdef long cap = max_steps + 1
    xs_arr = np.empty(cap, dtype=np.complex128)
    ss_arr = np.empty(cap, dtype=np.float64)
    ws_arr = np.empty(cap, dtype=np.complex128)
    nt = targets.shape[0]
    tdist_arr = np.full(nt, np.inf)
    tside_arr = np.zeros(nt)
    ts_arr = np.zeros(nt)
    cdef double complex[:] xs = xs_arr
    cdef double[:] ss = ss_arr
    cdef double complex[:] ws = ws_arr
    cdef double[:] tdist = tdist_arr
    cdef double[:] tside = tside_arr
    cdef double[:] ts = ts_arr

    cdef double complex rot = cexp(1j * theta)
    cdef double complex x = x0, sq = sq0, xn, q
    cdef double complex k1, k2, k3, k4, k5, k6, k7, r, dx, dx0 = 0, w = 0, dw
    cdef double s = 0.0, h = h0, err, dcrit, d, hmax, fac
    cdef long n = 0, j, steps = 0
    cdef int code = LENGTH_CAP
    cdef long index = -1
    cdef Py_ssize_t ns = stop_pts.shape[0], nc = crit.shape[0]

    with nogil:
        xs[0] = x
        ss[0] = 0.0
        ws[0] = 0.0
        k1 = rot / sq
        while True:
            if n >= max_steps:
                code = LENGTH_CAP
                break
            if s >= max_length:
                code = LENGTH_CAP
                break
            # keep |dx| below a quarter of the distance to the nearest critical point
            dcrit = 1e300
            for j in range(nc):
                d = cabs(x - crit[j])
                if d < dcrit:
                    dcrit = d
            hmax = 0.25 * dcrit * cabs(sq)
            if h > hmax:
                h = hmax
            if h < 1e-14 * (1.0 + s):
                code = UNDERFLOW
                break
            steps += 1
            if steps > 50 * max_steps:
                code = UNDERFLOW
                break
            r = branch_sqrt(num, den, x + h * A21 * k1, sq)
            k2 = rot / r
            r = branch_sqrt(num, den, x + h * (A31 * k1 + A32 * k2), sq)
            k3 = rot / r
            r = branch_sqrt(num, den, x + h * (A41 * k1 + A42 * k2 + A43 * k3), sq)
            k4 = rot / r
            r = branch_sqrt(num, den, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), sq)
            k5 = rot / r
            r = branch_sqrt(num, den, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), sq)
            k6 = rot / r
            xn = x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            r = branch_sqrt(num, den, xn, sq)
            k7 = rot / r
            # error measured in the distinguished coordinate
            err = cabs(h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)) * fmax(cabs(sq), cabs(r))
            if err > tol:
                fac = 0.9 * pow(tol / err, 0.2)
                h = h * fmax(0.1, fac)
                continue
            # accepted: integrate sqrt(Q) along the chord for the running w
            dx = xn - x
            dw = dx * (GW0 * branch_sqrt(num, den, x + GX0 * dx, sq)
                       + GW1 * branch_sqrt(num, den, x + GX1 * dx, sq)
                       + GW1 * branch_sqrt(num, den, x + GX2 * dx, sq)
                       + GW0 * branch_sqrt(num, den, x + GX3 * dx, r))
            w = w + dw
            for j in range(nt):
                d = seg_dist(targets[j], x, xn, &q)
                if d < tdist[j]:
                    tdist[j] = d
                    tside[j] = cimag(conj(dx) * (targets[j] - q))
                    ts[j] = s + h * cabs(q - x) / fmax(cabs(dx), 1e-300)
            if n == 0:
                dx0 = dx
            s += h
            n += 1
            xs[n] = xn
            ss[n] = s
            ws[n] = w
            x = xn
            sq = r
            k1 = k7
            for j in range(ns):
                if seg_dist(stop_pts[j], xs[n - 1], xn, &q) < stop_radii[j]:
                    code = STOP
                    index = j
                    break
            if code == STOP:
                break
            if cabs(x) > escape_radius:
                code = ESCAPE
                break
            if loop_radius > 0 and s > loop_min_length:
                if seg_dist(x0, xs[n - 1], xn, &q) < loop_radius and creal(conj(dx) * dx0) > 0:
                    code = LOOP
                    break
            fac = 0.9 * pow(tol / fmax(err, 1e-300), 0.2)
            h = h * fmin(5.0, fmax(0.2, fac))

    return (xs_arr[:n + 1], ss_arr[:n + 1], ws_arr[:n + 1], code, index,
            tdist_arr, tside_arr, ts_arr)

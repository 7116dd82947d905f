"""Pure-Python stepping kernel, used when the compiled one is unavailable.

Same algorithm, arguments and return value as the Cython ``trace_kernel``:
Dormand-Prince 5(4) on dx/ds = exp(i theta) / sqrt(Q(x)) with the error
measured in the distinguished coordinate w and the square-root branch
continued from the previous step.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

LENGTH_CAP, STOP, ESCAPE, LOOP, UNDERFLOW = range(5)

A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_gx, _gw = np.polynomial.legendre.leggauss(4)
GX = tuple(0.5 * (_gx + 1))
GW = tuple(0.5 * _gw)


def _horner(c, x):
    acc = c[-1]
    for a in reversed(c[:-1]):
        acc = acc * x + a
    return acc


def _seg_dist(p, a, b):
    d = b - a
    dd = d.real * d.real + d.imag * d.imag
    t = 0.0
    if dd > 0:
        t = min(1.0, max(0.0, (d.conjugate() * (p - a)).real / dd))
    q = a + t * d
    return abs(p - q), q


def trace_kernel(num, den, x0, sq0, theta, h0, tol, max_steps, max_length, escape_radius,
                 stop_pts, stop_radii, targets, crit, loop_radius, loop_min_length):
    num = [complex(c) for c in num]
    den = [complex(c) for c in den]
    stop_pts = [complex(c) for c in stop_pts]
    stop_radii = [float(r) for r in stop_radii]
    targets = [complex(c) for c in targets]
    crit = [complex(c) for c in crit]

    def branch_sqrt(x, ref):
        r = cmath.sqrt(_horner(num, x) / _horner(den, x))
        return -r if abs(r - ref) > abs(r + ref) else r

    rot = cmath.exp(1j * theta)
    x, sq = complex(x0), complex(sq0)
    s, h, w = 0.0, float(h0), 0j
    xs, ss, ws = [x], [0.0], [0j]
    nt = len(targets)
    tdist = [math.inf] * nt
    tside = [0.0] * nt
    ts = [0.0] * nt
    code, index = LENGTH_CAP, -1
    dx0 = 0j
    steps = 0
    k1 = rot / sq
    while True:
        if len(xs) - 1 >= max_steps or s >= max_length:
            code = LENGTH_CAP
            break
        dcrit = min((abs(x - c) for c in crit), default=1e300)
        h = min(h, 0.25 * dcrit * abs(sq))
        if h < 1e-14 * (1.0 + s):
            code = UNDERFLOW
            break
        steps += 1
        if steps > 50 * max_steps:
            code = UNDERFLOW
            break
        k = [k1]
        for i in range(1, 6):
            xi = x + h * sum(a * kj for a, kj in zip(A[i], k))
            k.append(rot / branch_sqrt(xi, sq))
        xn = x + h * sum(b * kj for b, kj in zip(B, k))
        r = branch_sqrt(xn, sq)
        k.append(rot / r)
        err = abs(h * sum(e * kj for e, kj in zip(E, k))) * max(abs(sq), abs(r))
        if err > tol:
            h *= max(0.1, 0.9 * (tol / err) ** 0.2)
            continue
        dx = xn - x
        refs = (sq, sq, sq, r)
        w += dx * sum(gw * branch_sqrt(x + gx * dx, ref) for gx, gw, ref in zip(GX, GW, refs))
        for j, t in enumerate(targets):
            d, q = _seg_dist(t, x, xn)
            if d < tdist[j]:
                tdist[j] = d
                tside[j] = (dx.conjugate() * (t - q)).imag
                ts[j] = s + h * abs(q - x) / max(abs(dx), 1e-300)
        if len(xs) == 1:
            dx0 = dx
        s += h
        xprev, x, sq, k1 = x, xn, r, k[6]
        xs.append(x)
        ss.append(s)
        ws.append(w)
        hit = next((j for j, (p, rad) in enumerate(zip(stop_pts, stop_radii))
                    if _seg_dist(p, xprev, x)[0] < rad), -1)
        if hit >= 0:
            code, index = STOP, hit
            break
        if abs(x) > escape_radius:
            code = ESCAPE
            break
        if loop_radius > 0 and s > loop_min_length:
            if _seg_dist(complex(x0), xprev, x)[0] < loop_radius and (dx.conjugate() * dx0).real > 0:
                code = LOOP
                break
        h *= min(5.0, max(0.2, 0.9 * (tol / max(err, 1e-300)) ** 0.2))

    return (np.array(xs, dtype=complex), np.array(ss), np.array(ws, dtype=complex), code, index,
            np.array(tdist), np.array(tside), np.array(ts))

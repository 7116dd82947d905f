"""Trajectories of phase theta, spectral networks and their degenerations.

A trajectory of phase theta of ``Q(x) dx^2`` is a curve along which
``exp(-i theta) * integral sqrt(Q) dx`` stays real. It is integrated as the
ODE ``dx/ds = exp(i theta) / sqrt(Q(x))`` where ``s`` is the length in the
distinguished coordinate. The stepping kernel is compiled when the Cython
extension is available and pure Python otherwise; set
``HYPERBPS_KERNEL=python`` to force the fallback.
"""

from __future__ import annotations

import cmath
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _trace_py
from .curves import CurveData, check_genericity
from .errors import NonGeneric, NumericFailure, UsageError
from .numeric import is_inf

log = logging.getLogger(__name__)

try:
    from ._trace import trace_kernel as _compiled_kernel
except ImportError:  # extension not built
    _compiled_kernel = None

LENGTH_CAP, STOP, ESCAPE, LOOP, UNDERFLOW = range(5)


def select_kernel(name: str | None = None):
    """Return (name, kernel). ``name`` is "cython", "python" or None for the default."""
    name = name or os.environ.get("HYPERBPS_KERNEL") or ("cython" if _compiled_kernel else "python")
    if name == "cython":
        if _compiled_kernel is None:
            raise UsageError("the compiled trajectory kernel is not built")
        return "cython", _compiled_kernel
    if name == "python":
        return "python", _trace_py.trace_kernel
    raise UsageError(f"unknown kernel {name!r}")


KERNEL_NAME, _kernel = select_kernel()


def use_kernel(name: str | None) -> str:
    """Switch the module-wide kernel; returns the name now in use."""
    global KERNEL_NAME, _kernel
    KERNEL_NAME, _kernel = select_kernel(name)
    return KERNEL_NAME


def worker_count() -> int:
    env = os.environ.get("HYPERBPS_THREADS")
    if env:
        return max(1, int(env))
    return max(1, min(8, os.cpu_count() or 1))


# ---------------------------------------------------------------- types


@dataclass(frozen=True)
class Phase:
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % math.pi)

    def distance(self, other: "Phase | float") -> float:
        t = other.theta if isinstance(other, Phase) else float(other)
        d = (self.theta - t) % math.pi
        return min(d, math.pi - d)


def phase_distance(a: float, b: float) -> float:
    return Phase(a).distance(b)


@dataclass(frozen=True)
class TraceLimits:
    """Stopping rules. Radii are relative to the curve scale."""

    capture_radius: float = 1e-3
    pole_radius: float = 1e-6
    escape_radius: float = 1e3
    seed_radius: float = 1e-5
    tol: float = 1e-12
    max_steps: int = 20000
    max_length: float = 1e8


@dataclass(frozen=True)
class Termination:
    kind: str  # infinite_pole, turning_point, length_cap, closed_loop
    where: complex | str | None = None
    miss: float | None = None


@dataclass
class Trajectory:
    theta: float
    start: complex
    ray: float
    points: np.ndarray
    s: np.ndarray
    w_values: np.ndarray  # exp(-i theta) * integral sqrt(Q) dx from the start
    sheet: complex  # sqrt(Q) at the first point
    termination: Termination

    @property
    def length(self) -> float:
        return float(self.w_values[-1].real)

    def drift(self) -> float:
        im = self.w_values.imag
        return float(np.max(np.abs(im - im[0])))

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.w_values.real) > 0))

    def to_json(self) -> dict:
        return {"theta": self.theta, "start": [self.start.real, self.start.imag],
                "termination": self.termination.kind,
                "points": [[p.real, p.imag] for p in self.points]}


@dataclass
class NetworkSnapshot:
    curve: CurveData
    theta: float
    critical_trajectories: list
    ring_domain_flags: dict

    def to_json(self) -> dict:
        return {"curve": self.curve.id, "theta": self.theta,
                "ring_domain_flags": self.ring_domain_flags,
                "trajectories": [t.to_json() for t in self.critical_trajectories]}


@dataclass
class DegenerationEvent:
    theta_star: float
    kind: str  # saddle_I, saddle_II, saddle_III, ring_degenerate
    length: float
    endpoints: tuple = ()
    pole: str | None = None
    miss: float = 0.0
    confirmed: bool = True
    matched_charge: object = None


@dataclass
class SweepCandidate:
    """A side-sign flip that did not refine to a saddle."""

    theta: float
    start: complex
    target: complex
    miss: float


# ---------------------------------------------------------------- local data


def _q_coeffs(curve: CurveData):
    return (np.ascontiguousarray(curve.Q.num.coeffs, dtype=np.complex128),
            np.ascontiguousarray(curve.Q.den.coeffs, dtype=np.complex128))


def _local_coefficient(curve: CurveData, tp) -> complex:
    """c in Q ~ c (x - b) at a simple zero, or Q ~ c / (x - p) at a simple pole."""
    num, den = curve.Q.num, curve.Q.den
    if tp.kind == "simple_zero":
        return complex(num.derivative()(tp.x) / den(tp.x))
    return complex(num(tp.x) / den.derivative()(tp.x))


def _find_turning_point(curve: CurveData, tp):
    if hasattr(tp, "kind"):
        return tp
    for t in curve.turning_points:
        if abs(t.x - complex(tp)) < 1e-9 * max(1.0, abs(t.x)):
            return t
    raise UsageError(f"{tp} is not a turning point of {curve.id}")


def seed_rays(curve: CurveData, turning_point, theta: float) -> list[float]:
    """Directions arg(x - b) of the critical trajectories leaving a turning point."""
    tp = _find_turning_point(curve, turning_point)
    c = _local_coefficient(curve, tp)
    if tp.kind == "simple_zero":
        return [((2 * theta - cmath.phase(c) + 2 * math.pi * k) / 3) % (2 * math.pi) for k in range(3)]
    return [(2 * theta - cmath.phase(c)) % (2 * math.pi)]


def _seed_start(curve: CurveData, tp, alpha: float, theta: float, r0: float):
    """Start point, sqrt(Q) there with the outgoing branch, and w at the start."""
    x0 = tp.x + r0 * cmath.exp(1j * alpha)
    sq = cmath.sqrt(curve.Q(x0))
    if ((cmath.exp(1j * theta) / sq) * cmath.exp(-1j * alpha)).real < 0:
        sq = -sq
    factor = 2 / 3 if tp.kind == "simple_zero" else 2.0
    w0 = factor * (x0 - tp.x) * sq
    return x0, sq, w0


def _critical_points(curve: CurveData) -> list[complex]:
    return curve.finite_critical


def _double_poles(curve: CurveData) -> list:
    return [p for p in curve.poles if p.order >= 2 and not is_inf(p.x)]


def _run(curve, x0, sq0, theta, limits: TraceLimits, stop_pts, stop_radii, targets,
         loop_radius=0.0, loop_min_length=0.0, escape=None, kernel=None):
    num, den = _q_coeffs(curve)
    crit = np.array(_critical_points(curve), dtype=np.complex128)
    h0 = 1e-3 * max(abs(x0 - c) for c in crit) * abs(sq0) if len(crit) else 1e-3
    h0 = min(h0, 1e-2) if h0 > 0 else 1e-6
    k = kernel or _kernel
    return k(num, den, complex(x0), complex(sq0), float(theta), float(h0), float(limits.tol),
             int(limits.max_steps), float(limits.max_length),
             float(escape if escape is not None else limits.escape_radius * curve.scale),
             np.array(stop_pts, dtype=np.complex128), np.array(stop_radii, dtype=np.float64),
             np.array(targets, dtype=np.complex128), crit,
             float(loop_radius), float(loop_min_length))


def trace(curve: CurveData, turning_point, ray: float, theta: float,
          limits: TraceLimits | None = None) -> Trajectory:
    """Trace the critical trajectory leaving ``turning_point`` in direction ``ray``."""
    limits = limits or TraceLimits()
    tp = _find_turning_point(curve, turning_point)
    sc = curve.scale
    x0, sq0, w0 = _seed_start(curve, tp, ray, theta, limits.seed_radius * sc)
    others = [t for t in curve.turning_points if t is not tp]
    poles = _double_poles(curve)
    stop_pts = [t.x for t in others] + [p.x for p in poles]
    radii = [limits.capture_radius * sc] * len(others) + [limits.pole_radius * sc] * len(poles)
    xs, ss, ws, code, index, tdist, _, _ = _run(curve, x0, sq0, theta, limits, stop_pts, radii,
                                                [t.x for t in others])
    if code == UNDERFLOW:
        raise NumericFailure(f"{curve.id}: step size underflow at x = {xs[-1]:.6g} (theta = {theta:.6g})")
    if code == STOP and index < len(others):
        miss, _ = _endpoint_offset(curve, others[index], xs[-2], xs[-1], ws[-1] + w0, theta)
        term = Termination("turning_point", others[index].x, miss)
    elif code == STOP:
        term = Termination("infinite_pole", poles[index - len(others)].label)
    elif code == ESCAPE:
        term = Termination("infinite_pole", "inf")
    elif code == LOOP:
        term = Termination("closed_loop")
    else:
        term = Termination("length_cap")
    rot = cmath.exp(-1j * theta)
    w = rot * (w0 + ws)
    return Trajectory(float(theta), tp.x, float(ray), xs, ss, w, sq0, term)


def _integral_to(curve: CurveData, tp, x: complex, sq: complex, nodes: int = 24) -> complex:
    """integral of sqrt(Q) dx from x to the turning point tp.

    The substitution x = b + (x_end - b) t^2 removes the square-root
    singularity, so Gauss-Legendre converges fast."""
    delta = x - tp.x
    t, wts = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (t + 1)
    wts = 0.5 * wts
    vals = np.sqrt(curve.Q(tp.x + delta * t**2).astype(complex))
    # continue the branch from the end point inward
    ref = sq
    out = np.empty_like(vals)
    for i in range(nodes - 1, -1, -1):
        v = vals[i]
        if abs(v - ref) > abs(v + ref):
            v = -v
        out[i] = v
        ref = v
    return -complex(np.sum(wts * out * 2 * delta * t))


def _endpoint_offset(curve: CurveData, tp, x_prev: complex, x_end: complex, w_end: complex, theta: float):
    """(miss, total length) of a trace stopped near the turning point tp.

    The miss is the offset of tp from the leaf in the distinguished
    coordinate, converted to an x-distance with the local normal form."""
    rot = cmath.exp(-1j * theta)
    sq = cmath.sqrt(curve.Q(x_end))
    # the branch carried by the trace makes exp(-i theta) sqrt(Q) dx positive
    if (rot * sq * (x_end - x_prev)).real < 0:
        sq = -sq
    w = rot * (w_end + _integral_to(curve, tp, x_end, sq))
    c = abs(_local_coefficient(curve, tp))
    dw = abs(w.imag)
    if tp.kind == "simple_zero":
        miss = (1.5 * dw / math.sqrt(c)) ** (2 / 3)
    else:
        miss = (dw / (2 * math.sqrt(c))) ** 2
    return float(miss), float(w.real)


def build_network(curve: CurveData, theta: float, limits: TraceLimits | None = None) -> NetworkSnapshot:
    """All critical trajectories of phase theta."""
    trajs = []
    for tp in curve.turning_points:
        for ray in seed_rays(curve, tp, theta):
            trajs.append(trace(curve, tp, ray, theta, limits))
    flags = {}
    for pole, ph, _ in ring_phases(curve):
        flags[pole] = ph.distance(theta) < 1e-9
    return NetworkSnapshot(curve, float(theta), trajs, flags)


def ring_phases(curve: CurveData) -> list[tuple[str, Phase, str]]:
    """Phases at which a degenerate ring domain surrounds a second-order pole."""
    out = []
    for p in curve.poles:
        if p.order != 2:
            continue
        m = curve.mass(p.label)
        out.append((p.label, Phase(cmath.phase(m) + math.pi / 2), f"g[{p.label}+] - g[{p.label}-]"))
    return out


def trace_loop(curve: CurveData, pole: str, theta: float, limits: TraceLimits | None = None,
               angle: float = 0.7) -> Trajectory:
    """Trace from a generic point near a second-order pole; a closed_loop
    termination confirms a ring domain at this phase."""
    limits = limits or TraceLimits()
    crit = _critical_points(curve)
    p = next(q for q in curve.poles if q.label == pole)
    if is_inf(p.x):
        rho = 10 * (1 + max((abs(c) for c in crit), default=1.0))
        x0 = rho * cmath.exp(1j * angle)
        escape = 100 * rho
        size = rho
    else:
        others = [abs(c - p.x) for c in crit if abs(c - p.x) > 0]
        rho = 0.3 * min(others) if others else 0.5
        x0 = p.x + rho * cmath.exp(1j * angle)
        escape = None
        size = rho
    sq0 = cmath.sqrt(curve.Q(x0))
    loop_len = 2 * math.pi * abs(curve.mass(pole))
    poles = _double_poles(curve)
    lim = replace(limits, max_length=50 * loop_len)
    xs, ss, ws, code, index, _, _, _ = _run(
        curve, x0, sq0, theta, lim, [q.x for q in poles], [limits.pole_radius * curve.scale] * len(poles),
        [], loop_radius=1e-4 * size, loop_min_length=0.5 * loop_len, escape=escape)
    kinds = {LOOP: "closed_loop", ESCAPE: "infinite_pole", STOP: "infinite_pole", LENGTH_CAP: "length_cap"}
    if code == UNDERFLOW:
        raise NumericFailure(f"{curve.id}: step size underflow near pole {pole}")
    return Trajectory(float(theta), x0, 0.0, xs, ss, cmath.exp(-1j * theta) * ws, sq0, Termination(kinds[code]))


# ---------------------------------------------------------------- sweep


@dataclass(frozen=True)
class _Ray:
    tp_index: int
    k: int  # ray label, continuous in theta


def _ray_angle(curve, tp, c, k, theta):
    if tp.kind == "simple_zero":
        return (2 * theta - cmath.phase(c) + 2 * math.pi * k) / 3
    return 2 * theta - cmath.phase(c)


class _Sweeper:
    def __init__(self, curve: CurveData, limits: TraceLimits, window: float, kernel):
        self.curve = curve
        self.limits = limits
        self.kernel = kernel
        self.window = window * curve.scale
        self.tps = list(curve.turning_points)
        self.coef = [_local_coefficient(curve, t) for t in self.tps]
        self.poles = _double_poles(curve)
        # leaves this far out run off to the pole at infinity without returning
        crit = _critical_points(curve)
        self.escape = 20 * (1 + max((abs(c) for c in crit), default=1.0))
        # inside these discs Q ~ m^2 / (x - p)^2 and leaves run monotonically into the pole
        self.pole_radii = [0.05 * min(abs(p.x - c) for c in crit if c != p.x) for p in self.poles]

    def probe(self, ray: _Ray, theta: float):
        """(distances, sides, lengths) to every other turning point."""
        tp = self.tps[ray.tp_index]
        sc = self.curve.scale
        alpha = _ray_angle(self.curve, tp, self.coef[ray.tp_index], ray.k, theta)
        x0, sq0, w0 = _seed_start(self.curve, tp, alpha, theta, self.limits.seed_radius * sc)
        others = [t.x for i, t in enumerate(self.tps) if i != ray.tp_index]
        stop = others + [p.x for p in self.poles]
        radii = [1e-8 * sc] * len(others) + self.pole_radii
        out = _run(self.curve, x0, sq0, theta, self.limits, stop, radii, others,
                   escape=self.escape, kernel=self.kernel)
        code, tdist, tside, ts = out[3], out[5], out[6], out[7]
        if code == UNDERFLOW:
            tdist = np.full_like(tdist, np.inf)
        return tdist, np.sign(tside), ts + abs(w0)

    def rays(self):
        for i, tp in enumerate(self.tps):
            for k in range(3 if tp.kind == "simple_zero" else 1):
                yield _Ray(i, k)

    def target_index(self, ray: _Ray, j: int) -> int:
        return j if j < ray.tp_index else j + 1


def _events_from_ray(sw: _Sweeper, ray: _Ray, thetas, grid, refine_tol):
    events, unresolved = [], []
    dist, side = grid
    n_t = dist.shape[1]
    for j in range(n_t):
        for a in range(len(thetas) - 1):
            if not (dist[a, j] < sw.window and dist[a + 1, j] < sw.window):
                continue
            if side[a, j] == 0 or side[a + 1, j] == 0 or side[a, j] == side[a + 1, j]:
                continue
            lo, hi = thetas[a], thetas[a + 1]
            s_lo = side[a, j]
            ok = True
            best = (min(dist[a, j], dist[a + 1, j]), None)
            while hi - lo > refine_tol:
                mid = 0.5 * (lo + hi)
                d, s, L = sw.probe(ray, mid)
                if not d[j] < sw.window or s[j] == 0:
                    if d[j] < 1e-8 * sw.curve.scale:
                        best = (d[j], (mid, L[j]))
                        break
                    ok = False
                    break
                if d[j] < best[0] or best[1] is None:
                    best = (d[j], (mid, L[j]))
                if s[j] == s_lo:
                    lo = mid
                else:
                    hi = mid
            target = sw.tps[sw.target_index(ray, j)]
            start = sw.tps[ray.tp_index]
            miss = best[0]
            if not ok or best[1] is None or miss >= 1e-6 * sw.curve.scale:
                unresolved.append(SweepCandidate(0.5 * (lo + hi), start.x, target.x, float(miss)))
                continue
            theta_star, L = best[1]
            kinds = {start.kind, target.kind}
            kind = ("saddle_I" if kinds == {"simple_zero"} else
                    "saddle_III" if kinds == {"simple_pole"} else "saddle_II")
            events.append(DegenerationEvent(theta_star % math.pi, kind, float(L), (start.x, target.x),
                                            miss=float(miss)))
    return events, unresolved


def sweep_saddles(curve: CurveData, grid_steps: int = 2000, refine_tol: float = 1e-10,
                  limits: TraceLimits | None = None, window: float = 0.25, workers: int | None = None,
                  kernel: str | None = None):
    """Saddle trajectories by side-sign bisection. Returns (events, unresolved)."""
    limits = limits or TraceLimits()
    sw = _Sweeper(curve, limits, window, select_kernel(kernel)[1] if kernel else _kernel)
    # offset the grid so that phases at round values (0, pi/2) fall inside cells
    thetas = 0.3819660112501051 * math.pi / grid_steps + np.linspace(0.0, math.pi, grid_steps + 1)
    rays = list(sw.rays())
    n_other = len(sw.tps) - 1
    if not rays or n_other == 0:
        return [], []

    def scan(ray):
        dist = np.empty((len(thetas), n_other))
        side = np.empty((len(thetas), n_other))
        for a, th in enumerate(thetas):
            d, s, _ = sw.probe(ray, th)
            dist[a], side[a] = d, s
        return _events_from_ray(sw, ray, thetas, (dist, side), refine_tol)

    workers = workers or worker_count()
    if workers > 1 and len(rays) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(scan, rays))
    else:
        results = [scan(r) for r in rays]

    events, unresolved = [], []
    for ev, un in results:
        for e in ev:
            dup = any(phase_distance(e.theta_star, f.theta_star) < 1e-6
                      and set(map(complex, e.endpoints)) == set(map(complex, f.endpoints)) for f in events)
            if not dup:
                events.append(e)
        unresolved += un
    for u in unresolved:
        log.debug("unresolved sign flip at theta=%.8f (%s -> %s, miss %.2e)", u.theta, u.start, u.target, u.miss)
    return sorted(events, key=lambda e: e.theta_star), unresolved


def ring_events(curve: CurveData, limits: TraceLimits | None = None) -> list[DegenerationEvent]:
    events = []
    for pole, ph, _ in ring_phases(curve):
        t = trace_loop(curve, pole, ph.theta, limits)
        confirmed = t.termination.kind == "closed_loop"
        L = t.length if confirmed else 2 * math.pi * abs(curve.mass(pole))
        events.append(DegenerationEvent(ph.theta, "ring_degenerate", float(L), pole=pole, confirmed=confirmed))
    return events


def detect_degenerations(curve: CurveData, grid_steps: int = 2000, refine_tol: float = 1e-10,
                         limits: TraceLimits | None = None, workers: int | None = None,
                         check: bool = True) -> list[DegenerationEvent]:
    """All saddle and ring-domain degenerations with phase in [0, pi)."""
    if check:
        rep = check_genericity(curve.id, curve.m)
        if not rep.generic:
            raise NonGeneric(rep)
    saddles, _ = sweep_saddles(curve, grid_steps, refine_tol, limits, workers=workers)
    return sorted(saddles + ring_events(curve, limits), key=lambda e: e.theta_star)


def distinct_phases(events, tol: float = 1e-6) -> list[float]:
    out: list[float] = []
    for e in sorted(events, key=lambda e: e.theta_star):
        if not any(phase_distance(e.theta_star, p) < tol for p in out):
            out.append(e.theta_star)
    return out

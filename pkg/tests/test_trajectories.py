import cmath
import math

import numpy as np
import pytest

import oracles
from hyperbps import trajectories as tr
from hyperbps.bps import expected_spectrum, identify
from hyperbps.curves import build_curve, default_params
from hyperbps.errors import NonGeneric, UsageError
from hyperbps.trajectories import (Phase, build_network, detect_degenerations, distinct_phases, ring_phases,
                                   seed_rays, trace, trace_loop)

WEB_M = 0.4 + 0.25j


def _same_angles(a, b, tol=1e-12):
    a = sorted(x % (2 * math.pi) for x in a)
    b = sorted(x % (2 * math.pi) for x in b)
    return len(a) == len(b) and all(min(abs(x - y), 2 * math.pi - abs(x - y)) < tol for x, y in zip(a, b))


# ---------------------------------------------------------------- seeds


def test_airy_rays():
    c = build_curve("Ai", {})
    assert _same_angles(seed_rays(c, 0.0, 0.0), [0, 2 * math.pi / 3, 4 * math.pi / 3])


def test_degenerate_bessel_ray():
    c = build_curve("dBes", {})
    assert _same_angles(seed_rays(c, 0.0, 0.0), [0.0])


def test_unknown_turning_point():
    with pytest.raises(UsageError):
        seed_rays(build_curve("Ai", {}), 1.0, 0.0)


def test_rays_are_pi_periodic():
    c = build_curve("HG", default_params("HG"))
    for tp in c.turning_points:
        assert _same_angles(seed_rays(c, tp, 0.4), seed_rays(c, tp, 0.4 + math.pi), 1e-9)


# ---------------------------------------------------------------- traces


def test_airy_trace_runs_along_the_real_axis():
    c = build_curve("Ai", {})
    t = trace(c, 0.0, 0.0, 0.0)
    assert t.termination.kind == "infinite_pole"
    assert np.max(np.abs(t.points.imag)) < 1e-8
    assert t.points[-1].real > 10


def test_weber_saddle_connects_the_zeros():
    c = build_curve("Web", {"minf": WEB_M})
    theta = cmath.phase(WEB_M) + math.pi / 2
    b1, b2 = [tp.x for tp in c.turning_points]
    ray = cmath.phase(b2 - b1)
    t = trace(c, b1, ray, theta)
    assert t.termination.kind == "turning_point"
    assert abs(t.termination.where - b2) < 1e-12
    assert t.termination.miss < 1e-6
    # the leaf is the straight segment
    d = (t.points - b1) / (b2 - b1)
    assert np.max(np.abs(d.imag)) < 1e-6
    assert abs(2 * t.length - abs(oracles.weber_period(WEB_M)) * 2) / (2 * math.pi * abs(WEB_M)) < 0.01


@pytest.mark.parametrize("cid", ["Web", "Kum", "HG", "Leg"])
@pytest.mark.parametrize("theta", [0.3, 1.9])
def test_foliation_is_conserved(cid, theta):
    c = build_curve(cid, default_params(cid))
    for t in build_network(c, theta).critical_trajectories:
        assert t.drift() < 1e-6
        assert t.monotone()


def test_kernels_agree():
    if tr._compiled_kernel is None:
        pytest.skip("compiled kernel not built")
    c = build_curve("Kum", default_params("Kum"))
    tp = c.turning_points[0]
    ray = seed_rays(c, tp, 0.8)[1]
    old = tr.KERNEL_NAME
    try:
        tr.use_kernel("python")
        a = trace(c, tp, ray, 0.8)
        tr.use_kernel("cython")
        b = trace(c, tp, ray, 0.8)
    finally:
        tr.use_kernel(old)
    assert a.termination.kind == b.termination.kind
    assert len(a.points) == len(b.points)
    assert np.max(np.abs(a.points - b.points)) < 1e-9


def test_unknown_kernel_name():
    with pytest.raises(UsageError):
        tr.select_kernel("fortran")


# ---------------------------------------------------------------- networks


def test_weber_network():
    c = build_curve("Web", {"minf": WEB_M})
    snap = build_network(c, 0.0)
    assert len(snap.critical_trajectories) == 6
    assert all(t.termination.kind == "infinite_pole" for t in snap.critical_trajectories)


@pytest.mark.parametrize("theta", [0.2, 1.0, 2.9])
def test_whittaker_network(theta):
    snap = build_network(build_curve("Whi", default_params("Whi")), theta)
    assert len(snap.critical_trajectories) == 4


def _distance_to_polyline(p, poly):
    a, d = poly[:-1], np.diff(poly)
    t = np.clip(((p - a) * np.conj(d)).real / np.maximum(np.abs(d) ** 2, 1e-300), 0, 1)
    return float(np.min(np.abs(a + t * d - p)))


def _set_distance(ta, tb):
    """Largest relative distance from a point of ta to the polyline tb, over
    the stretch both traces cover."""
    reach = min(ta.length, tb.length)
    pts = ta.points[ta.w_values.real <= reach][::5]
    return max(_distance_to_polyline(p, tb.points) / max(1.0, abs(p)) for p in pts)


@pytest.mark.parametrize("cid", ["Kum", "HG", "Web"])
def test_network_is_pi_periodic(cid):
    c = build_curve(cid, default_params(cid))
    a = build_network(c, 0.7).critical_trajectories
    b = build_network(c, 0.7 + math.pi).critical_trajectories
    assert len(a) == len(b)
    for ta in a:
        tb = min(b, key=lambda t: abs(t.points[0] - ta.points[0]) + abs(t.points[5] - ta.points[5]))
        assert _set_distance(ta, tb) < 1e-8 and _set_distance(tb, ta) < 1e-8


def test_network_json():
    snap = build_network(build_curve("Web", {"minf": WEB_M}), 0.0)
    d = snap.to_json()
    assert d["curve"] == "Web" and len(d["trajectories"]) == 6
    assert all(len(p) == 2 for p in d["trajectories"][0]["points"])


# ---------------------------------------------------------------- rings


def test_bessel_ring_phase():
    rows = ring_phases(build_curve("Bes", default_params("Bes")))
    assert len(rows) == 1
    assert abs(rows[0][1].theta - 0.8961) < 1e-4


def test_gauss_ring_phases():
    m = default_params("HG")
    got = sorted(ph.theta for _, ph, _ in ring_phases(build_curve("HG", m)))
    ref = sorted(oracles.phase_mod_pi(1j * m[k]) for k in ("m0", "m1", "minf"))
    assert np.allclose(got, ref, atol=1e-12)
    assert np.allclose(got, [1.76105, 1.90817, 2.69356], atol=1e-4)


def test_airy_has_no_ring():
    assert ring_phases(build_curve("Ai", {})) == []


def test_loop_closes_at_ring_phase():
    c = build_curve("Bes", default_params("Bes"))
    pole, ph, _ = ring_phases(c)[0]
    t = trace_loop(c, pole, ph.theta)
    assert t.termination.kind == "closed_loop"
    # the trace stops on the first step past closure
    assert abs(t.length - 2 * math.pi * abs(c.m["m0"])) < 1e-2 * t.length


def test_phase_wraps():
    assert abs(Phase(math.pi + 0.25).theta - 0.25) < 1e-15
    assert Phase(0.01).distance(math.pi - 0.01) < 0.021


# ---------------------------------------------------------------- degenerations


def test_weber_single_saddle():
    c = build_curve("Web", {"minf": WEB_M})
    events = detect_degenerations(c, grid_steps=400)
    assert len(events) == 1 and events[0].kind == "saddle_I"
    assert oracles.phase_dist(events[0].theta_star, 2.1294) < 1e-3
    s = expected_spectrum(c)
    g = identify(c, events[0], s)
    assert abs(abs(s.Z(g)) - 2 * events[0].length) < 0.05 * abs(s.Z(g))


def test_legendre_simultaneous_events():
    events = detect_degenerations(build_curve("Leg", {"minf": 1j}), grid_steps=400)
    assert sorted(e.kind for e in events) == ["ring_degenerate", "saddle_III"]
    assert len(distinct_phases(events, 1e-6)) == 1


def test_degenerations_need_generic_point():
    with pytest.raises(NonGeneric):
        detect_degenerations(build_curve("HG", {"m0": 1, "m1": 2, "minf": 4}))


def test_degenerate_bessel_has_no_events():
    assert detect_degenerations(build_curve("dBes", {}), grid_steps=200) == []

import cmath
import itertools

import numpy as np
import pytest

import oracles
from hyperbps.curves import CURVE_IDS, build_curve, default_params, random_params
from hyperbps.errors import UsageError
from hyperbps.numeric import contour_coeffs, path_integral
from hyperbps.toprec import (CorrelatorSession, bergman, bernoulli, bernoulli_weight, eval_W, free_energy_closed,
                             free_energy_recursion, partition_series, recursion_kernel)

WEB_M = 0.4 + 0.25j
NONTRIVIAL = [c for c in CURVE_IDS if c not in ("Ai", "dBes")]


@pytest.fixture(scope="module")
def web_session():
    return CorrelatorSession(build_curve("Web", {"minf": WEB_M}), g_max=3)


@pytest.fixture(scope="module")
def airy_session():
    return CorrelatorSession(build_curve("Ai", {}), g_max=2, n_max=3)


# ---------------------------------------------------------------- kernels


def test_bergman_examples():
    assert bergman(2, 3) == 1
    assert abs(bergman(0, 1j) + 1) < 1e-15


def test_bergman_symmetry(rng):
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    assert bergman(a, b) == bergman(b, a)


def test_bergman_rejects_coincident_points():
    with pytest.raises(UsageError):
        bergman(1.5, 1.5)


def test_weber_kernel_against_exact_value():
    c = build_curve("Web", {"minf": 1.0})
    assert abs(recursion_kernel(c, 1.0, 5.0, 1.3) - oracles.weber_kernel(5, 1.3)) < 1e-14
    assert np.isfinite(recursion_kernel(c, 1.0, 5.0, 1.3))


def test_kernel_numerator_is_integral_of_bergman(rng):
    c = build_curve("Web", {"minf": 1.0})
    for _ in range(5):
        z0 = 4 + rng.normal() + 1j * rng.normal()
        z = 1 + 0.3 * (rng.normal() + 1j * rng.normal())
        zb = c.involution(z)
        lhs = path_integral(lambda t: bergman(z0, t), [zb, z], order=30)
        assert abs(lhs - (1 / (z0 - z) - 1 / (z0 - zb))) < 1e-10


def test_kernel_transforms_as_a_differential_under_the_involution(rng):
    for cid in ("Web", "HG", "Kum"):
        c = build_curve(cid, default_params(cid))
        sig = c.involution
        for _ in range(10):
            z0 = complex(rng.normal(), rng.normal()) * 3
            z = c.ramification_z[0] + 0.2 * complex(rng.normal(), rng.normal())
            k1 = recursion_kernel(c, None, z0, z)
            k2 = recursion_kernel(c, None, z0, sig(z))
            assert abs(k2 - k1 * sig.derivative(z)) < 1e-9 * max(1, abs(k1))


# ---------------------------------------------------------------- correlators


def test_w02_is_bergman(airy_session):
    assert eval_W(airy_session, 0, 2, (2, 3)) == 1


def test_airy_w03_against_symbolic_residue(airy_session):
    val = eval_W(airy_session, 0, 3, (2, 3, 5))
    assert abs(val - oracles.airy_w03(2, 3, 5)) < 1e-12


def test_airy_w03_symmetry(airy_session):
    vals = [eval_W(airy_session, 0, 3, p) for p in itertools.permutations((2, 3, 5))]
    assert max(abs(v - vals[0]) for v in vals) < 1e-10 * abs(vals[0])


def test_tensor_and_quadrature_agree(web_session):
    z = (2.3 + 0.4j,)
    a = eval_W(web_session, 1, 1, z)
    b = eval_W(web_session, 1, 1, z, method="quadrature")
    assert abs(a - b) < 1e-10 * abs(a)


def test_w03_tensor_and_quadrature_agree(rng):
    s = CorrelatorSession(build_curve("Kum", default_params("Kum")), g_max=1, n_max=3)
    pts = tuple(complex(3 + rng.normal(), rng.normal()) for _ in range(3))
    a, b = s.eval(0, 3, pts), s.eval_quadrature(0, 3, pts)
    assert abs(a - b) < 1e-9 * abs(a)


def test_basis_too_small_is_reported(web_session):
    with pytest.raises(UsageError):
        web_session.tensor(4, 1)


# ---------------------------------------------------------------- free energies


def test_weber_recursion_genus_two(web_session):
    v = free_energy_recursion(web_session, 2).value
    ref = -1 / (240 * WEB_M**2)
    assert abs(v - ref) < 1e-8 * abs(ref)


def test_contour_route_matches_tensor_route(web_session):
    # the contour route loses digits to the small circle radius at higher genus
    for g, tol in ((2, 1e-8), (3, 1e-4)):
        a = free_energy_recursion(web_session, g).value
        b = free_energy_recursion(web_session, g, method="contour")
        assert abs(a - b.value) < tol * abs(a)
        assert abs(b.error_estimate - abs(a - b.value)) < 1e-15


def test_airy_free_energy_vanishes(airy_session):
    assert abs(free_energy_recursion(airy_session, 2).value) < 1e-10


def test_gauss_recursion_matches_closed_form():
    m = default_params("HG")
    s = CorrelatorSession(build_curve("HG", m), g_max=2)
    rec = free_energy_recursion(s, 2).value
    ref = oracles.free_energy("HG", m, 2)
    assert abs(rec - ref) < 1e-8 * abs(ref)


def test_constant_of_integration_is_irrelevant(web_session):
    before = web_session.free_energy(2)
    for loc in web_session._local:
        loc["phi"][0] += 17.0
    try:
        assert web_session.free_energy(2) == before
    finally:
        for loc in web_session._local:
            loc["phi"][0] -= 17.0


def test_recursion_needs_genus_two(web_session):
    with pytest.raises(UsageError):
        free_energy_recursion(web_session, 1)


def test_closed_form_examples():
    m = 0.7 - 0.2j
    assert abs(free_energy_closed("Web", {"minf": m}, 2).value + 1 / (240 * m**2)) < 1e-15
    assert abs(free_energy_closed("Bes", {"m0": m}, 2).value - 1 / (960 * m**2)) < 1e-15
    assert free_energy_closed("dBes", {}, 2).value == 0


@pytest.mark.parametrize("cid", NONTRIVIAL)
def test_closed_form_against_tables(cid, rng):
    for _ in range(3):
        m = random_params(cid, rng)
        for g in range(2, 7):
            ours = free_energy_closed(cid, m, g).value
            ref = oracles.free_energy(cid, m, g)
            assert abs(ours - ref) <= 1e-12 * abs(ref)


def test_low_genus_needs_ambiguity_flag():
    with pytest.raises(UsageError):
        free_energy_closed("Web", {"minf": 1}, 0)
    v = free_energy_closed("Web", {"minf": 1}, 1, modulo_ambiguity=True)
    assert v.modulo == "additive constants"


def test_genus_zero_and_one_against_tables(rng):
    for cid in ("HG", "Kum"):
        m = random_params(cid, rng)
        assert abs(free_energy_closed(cid, m, 0, True).value - oracles.f0(cid, m)) < 1e-12
    for cid in ("Kum", "dHG"):
        m = random_params(cid, rng)
        # logarithm branches shift F_1 by multiples of 2 pi i / 12, a constant
        d = (free_energy_closed(cid, m, 1, True).value - oracles.f1(cid, m)) / (2j * cmath.pi / 12)
        assert abs(d - round(d.real)) < 1e-10


def test_partition_series_airy():
    assert partition_series("Ai", {}, 3) == [0, 0, 0, 0]


def test_partition_series_weber():
    s = partition_series("Web", {"minf": 1.0}, 3)
    assert abs(s[2] - (-1 / 30) / 8) < 1e-15
    assert abs(s[3] - (1 / 42) / 24) < 1e-15


@pytest.mark.parametrize("cid", NONTRIVIAL)
def test_homogeneity(cid, rng):
    m = random_params(cid, rng)
    lam = 2.0
    for g in range(2, 6):
        a = free_energy_closed(cid, {k: lam * v for k, v in m.items()}, g).value
        b = lam ** (2 - 2 * g) * free_energy_closed(cid, m, g).value
        assert abs(a - b) <= 1e-14 * abs(b)


def test_bernoulli_numbers():
    for n in range(0, 16):
        assert bernoulli(n) == oracles.bernoulli(n)
    for g in range(2, 8):
        assert abs(bernoulli_weight(g) - oracles.weight(g)) < 1e-16


def test_superposition_of_gauss_free_energy(rng):
    m = random_params("HG", rng)
    m0, m1, mi = m["m0"], m["m1"], m["minf"]
    for g in (2, 3, 4):
        web = sum(free_energy_closed("Web", {"minf": m0 + e1 * m1 + e2 * mi}, g).value
                  for e1 in (1, -1) for e2 in (1, -1))
        bes = sum(free_energy_closed("Bes", {"m0": m[k]}, g).value for k in ("m0", "m1", "minf"))
        hg = free_energy_closed("HG", m, g).value
        assert abs(hg - web - bes) <= 1e-12 * abs(hg)


def test_residue_free_at_ramification(web_session):
    for r in web_session.curve.ramification_z:
        rho = 0.3
        for g in (2, 3):
            def w(z, g=g):
                return np.array([web_session.eval(g, 1, (zz,)) for zz in np.atleast_1d(z)])

            kmax = 6 * g - 2
            lc = contour_coeffs(w, r, range(-kmax, 0), radius=rho, rel_tol=1e-11)
            scale = max(abs(lc.coeff(-k)) * rho**-k for k in range(1, kmax + 1))
            assert abs(lc.coeff(-1)) * rho**-1 < 1e-8 * scale

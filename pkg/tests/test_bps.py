import json
import math

import numpy as np
import pytest

import oracles
from hyperbps.bps import (OMEGA_ALT_BY_KIND, OMEGA_BY_KIND, central_charge, check_structure, expected_spectrum,
                          identify, lattice_for)
from hyperbps.curves import CURVE_IDS, build_curve, default_params, random_params
from hyperbps.errors import IdentificationFailure, NonGeneric
from hyperbps.trajectories import DegenerationEvent

TWO_PI_I = oracles.TWO_PI_I


def _curve(cid, m=None):
    return build_curve(cid, default_params(cid) if m is None else m)


# ---------------------------------------------------------------- lattice


def test_gauss_lattice():
    lat = lattice_for(_curve("HG"))
    assert set(lat.generators) == {"0+", "0-", "1+", "1-", "inf+", "inf-"}
    assert lat.relation == (1,) * 6
    assert lat.rank == 5
    # the anti-invariant charges g[s+] - g[s-] are independent
    rings = [lat.charge({s + "+": 1, s + "-": -1}).vector for s in ("0", "1", "inf")]
    assert np.linalg.matrix_rank(np.array(rings)) == 3


def test_weber_lattice_relation():
    lat = lattice_for(_curve("Web"))
    assert set(lat.generators) == {"inf+", "inf-"}
    assert (lat.charge({"inf+": 1}) + lat.charge({"inf-": 1})).is_zero()


@pytest.mark.parametrize("cid", ["Ai", "dBes"])
def test_trivial_lattices(cid):
    assert lattice_for(_curve(cid)).generators == ()


def test_canonical_reduction_is_deterministic():
    lat = lattice_for(_curve("HG"))
    a = lat.charge({"inf-": 1})
    b = -lat.charge({"0+": 1, "0-": 1, "1+": 1, "1-": 1, "inf+": 1})
    assert a == b and hash(a) == hash(b)
    assert "inf-" not in a.as_dict()


# ---------------------------------------------------------------- central charges


def test_gauss_central_charges():
    c = _curve("HG")
    m = c.m
    C = lattice_for(c).charge
    assert abs(central_charge(c, C({"inf+": 1})) - TWO_PI_I * m["minf"]) < 1e-14
    assert central_charge(c, lattice_for(c).zero()) == 0
    z = central_charge(c, C({"0+": 1, "1-": 1, "inf+": 1}))
    assert abs(z - TWO_PI_I * (m["m0"] - m["m1"] + m["minf"])) < 1e-14


def test_central_charge_matches_residues():
    c = _curve("Kum")
    lat = lattice_for(c)
    for p in c.punctures:
        if p.label in lat.generators:
            assert abs(central_charge(c, lat.charge({p.label: 1})) - TWO_PI_I * p.residue * (
                -1 if p.label.startswith("inf") else 1)) < 1e-10


@pytest.mark.parametrize("cid", ["HG", "dHG", "Kum", "Leg"])
def test_central_charge_is_additive(cid, rng):
    c = _curve(cid)
    lat = lattice_for(c)
    n = len(lat.generators)
    for _ in range(100):
        a = lat.charge(dict(zip(lat.generators, rng.integers(-3, 4, n))))
        b = lat.charge(dict(zip(lat.generators, rng.integers(-3, 4, n))))
        za, zb = central_charge(c, a), central_charge(c, b)
        assert abs(central_charge(c, a + b) - za - zb) <= 1e-14 * (abs(za) + abs(zb) + 1)


@pytest.mark.parametrize("cid", [c for c in CURVE_IDS if c not in ("Ai", "dBes")])
def test_relation_has_zero_central_charge(cid):
    c = _curve(cid)
    lat = lattice_for(c)
    rel = lat.charge(dict(zip(lat.generators, lat.relation)))
    assert rel.is_zero()
    assert abs(central_charge(c, rel)) < 1e-13


# ---------------------------------------------------------------- spectra


def test_gauss_spectrum():
    s = expected_spectrum(_curve("HG"))
    om = [r.omega for r in s.rows]
    assert len(om) == 14 and om.count(1) == 8 and om.count(-1) == 6
    Z = sorted((r.Z for r in s.rows), key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    ref = sorted(oracles.hg_charges(*(s.curve.m[k] for k in ("m0", "m1", "minf"))),
                 key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    assert np.allclose(Z, ref, atol=1e-12)


def test_legendre_spectrum():
    c = _curve("Leg")
    mi = c.m["minf"]
    got = sorted((r.omega, round(r.Z.real, 9), round(r.Z.imag, 9)) for r in expected_spectrum(c).rows)
    ref = sorted((om, round(z.real, 9), round(z.imag, 9))
                 for om, z in ((4, TWO_PI_I * mi), (4, -TWO_PI_I * mi), (-1, 2 * TWO_PI_I * mi),
                               (-1, -2 * TWO_PI_I * mi)))
    assert got == ref


def test_degenerate_bessel_spectrum_is_empty():
    assert expected_spectrum(_curve("dBes")).rows == []


def test_spectrum_rejects_non_generic_point():
    with pytest.raises(NonGeneric):
        expected_spectrum(build_curve("HG", {"m0": 1, "m1": 2, "minf": 4}))


def test_omega_conventions():
    assert OMEGA_BY_KIND["IV-ring"] == -1 and OMEGA_ALT_BY_KIND["IV-ring"] == -2
    assert [OMEGA_BY_KIND[k] for k in ("I", "II", "III")] == [1, 2, 4]


@pytest.mark.parametrize("cid", CURVE_IDS)
def test_omega_symmetry(cid, rng):
    s = expected_spectrum(build_curve(cid, random_params(cid, rng)))
    assert all(s.omega_of(-c) == v for c, v in s.omega.items())


def test_spectrum_row_json():
    row = expected_spectrum(_curve("Web")).rows[0]
    d = json.loads(json.dumps(row.to_json()))
    assert set(d) == {"charge", "kind", "Z", "omega", "theta"}
    assert complex(*d["Z"]) == row.Z and d["omega"] == 1


# ---------------------------------------------------------------- identification


def test_identify_weber_saddle():
    c = _curve("Web")
    s = expected_spectrum(c)
    mi = c.m["minf"]
    theta = (math.atan2(mi.imag, mi.real) + math.pi / 2) % math.pi
    ev = DegenerationEvent(theta, "saddle_I", math.pi * abs(mi))
    g = identify(c, ev, s)
    assert g in (s.lattice.charge({"inf+": 1}), s.lattice.charge({"inf+": -1}))


def test_identify_bessel_ring():
    c = _curve("Bes")
    s = expected_spectrum(c)
    ev = DegenerationEvent(0.8961, "ring_degenerate", 2 * math.pi * abs(c.m["m0"]), pole="0")
    g = identify(c, ev, s)
    ring = s.lattice.charge({"0+": 1, "0-": -1})
    assert g in (ring, -ring)


def test_identify_gauss_saddle():
    c = _curve("HG")
    s = expected_spectrum(c)
    m0, m1, mi = (c.m[k] for k in ("m0", "m1", "minf"))
    z = TWO_PI_I * (m0 - m1 - mi)
    ev = DegenerationEvent(oracles.phase_mod_pi(z), "saddle_I", abs(z) / 2)
    g = identify(c, ev, s)
    ref = s.lattice.charge({"0+": 1, "1-": 1, "inf-": 1})
    assert g in (ref, -ref)


def test_identify_reports_failure():
    c = _curve("Web")
    s = expected_spectrum(c)
    theta = (s.rows[0].theta_bps + 0.5) % math.pi
    with pytest.raises(IdentificationFailure):
        identify(c, DegenerationEvent(theta, "saddle_I", 1.0), s)


# ---------------------------------------------------------------- structure


@pytest.mark.parametrize("cid", CURVE_IDS)
def test_structures_are_well_behaved(cid, rng):
    rep = check_structure(expected_spectrum(build_curve(cid, random_params(cid, rng))))
    assert rep.symmetric and rep.finite and rep.integral and rep.uncoupled
    assert rep.support_constant > 0


def test_structure_at_non_generic_point():
    rep = check_structure(expected_spectrum(build_curve("HG", {"m0": 1, "m1": 2, "minf": 4}), check=False))
    assert rep.symmetric and rep.finite and rep.integral


def test_empty_structure_support_constant():
    rep = check_structure(expected_spectrum(_curve("Ai")))
    assert rep.ok and rep.support_constant == math.inf

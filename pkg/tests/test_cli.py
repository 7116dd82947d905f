import json
import math
import xml.etree.ElementTree as ET

import pytest
from click.testing import CliRunner
from hypothesis import given
from hypothesis import strategies as st

import hyperbps.toprec
from hyperbps.cli import format_complex, main, parse_complex, parse_params
from hyperbps.errors import NumericFailure, UsageError

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def run():
    runner = CliRunner()

    def _run(*args):
        return runner.invoke(main, list(args), catch_exceptions=False)

    return _run


# ---------------------------------------------------------------- literals


@pytest.mark.parametrize("text,value", [
    ("3", 3), ("i", 1j), ("-i", -1j), ("0.5+0.2i", 0.5 + 0.2j), ("1e-3-2e+4i", 1e-3 - 2e4j),
    ("-0.32-0.63i", -0.32 - 0.63j), ("2.5i", 2.5j), ("1+0i", 1), ("1-2j", 1 - 2j),
])
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "abc", "1+2", "i+1"])
def test_parse_complex_rejects(text):
    with pytest.raises(UsageError):
        parse_complex(text)


@given(st.complex_numbers(allow_nan=False, allow_infinity=False))
def test_format_parse_round_trip(c):
    assert parse_complex(format_complex(c)) == c


def test_parse_params_fills_presets():
    m = parse_params("HG", ["m0=1+2i"])
    assert m["m0"] == 1 + 2j and set(m) == {"m0", "m1", "minf"}
    with pytest.raises(UsageError):
        parse_params("Web", ["minf"])


# ---------------------------------------------------------------- curves


def test_curves_table(run):
    r = run("curves")
    assert r.exit_code == 0
    lines = {ln.split()[0]: ln for ln in r.output.splitlines()}
    assert "HG" in lines and "Ai" in lines
    assert lines["Ai"].split()[1] == "-"


def test_curves_json(run):
    rows = json.loads(run("curves", "--json").output)
    assert len(rows) == 9
    assert {"id": "Ai", "params": [], "Q": "x"} in rows


# ---------------------------------------------------------------- fg


def _fg(run, *args):
    r = run("fg", "--json", *args)
    assert r.exit_code == 0, r.output
    d = json.loads(r.output)
    return complex(*d["value"])


def test_fg_weber_closed(run):
    v = _fg(run, "--curve", "Web", "--params", "minf=1+0i", "--g", "2", "--method", "closed")
    assert abs(v + 1 / 240) < 1e-15
    out = run("fg", "--curve", "Web", "--params", "minf=1+0i", "--g", "2").output
    assert out.startswith("F_2 = -0.0041666")


def test_fg_airy(run):
    assert _fg(run, "--curve", "Ai", "--g", "3") == 0


def test_fg_bps_matches_closed(run):
    a = _fg(run, "--curve", "Web", "--params", "minf=0.4+0.25i", "--g", "2", "--method", "bps")
    b = _fg(run, "--curve", "Web", "--params", "minf=0.4+0.25i", "--g", "2", "--method", "closed")
    assert abs(a - b) <= 1e-12 * abs(b)


def test_fg_recursion(run):
    v = _fg(run, "--curve", "Bes", "--g", "2", "--method", "tr")
    m = -0.5 + 0.4j
    assert abs(v - 1 / (960 * m**2)) < 1e-8 * abs(1 / (960 * m**2))


def test_fg_low_genus_needs_flag(run):
    assert run("fg", "--curve", "Web", "--g", "0").exit_code == 2
    r = run("fg", "--curve", "Web", "--g", "0", "--modulo-ambiguity", "--json")
    assert json.loads(r.output)["modulo"] == "quadratic polynomials"


def test_fg_invalid_parameters(run):
    r = run("fg", "--curve", "Kum", "--params", "m0=1,minf=-1", "--g", "2")
    assert r.exit_code == 2 and "error" in r.output


def test_fg_non_generic(run):
    r = run("fg", "--curve", "HG", "--params", "m0=1,m1=2,minf=4", "--g", "2", "--method", "tr")
    assert r.exit_code == 2


def test_fg_numeric_failure(run, monkeypatch):
    def boom(*a, **k):
        raise NumericFailure("no convergence")

    monkeypatch.setattr(hyperbps.toprec, "free_energy_recursion", boom)
    r = run("fg", "--curve", "Web", "--g", "2", "--method", "tr")
    assert r.exit_code == 3


# ---------------------------------------------------------------- network


def _polylines(path):
    root = ET.parse(path).getroot()
    assert root.tag == SVG + "svg" and root.get("version") == "1.1"
    return root.findall(f"{SVG}polyline")


def test_network_weber(run, tmp_path):
    out, js = tmp_path / "web.svg", tmp_path / "web.json"
    r = run("network", "--curve", "Web", "--params", "minf=0.4+0.25i", "--theta", "0", "--out", str(out),
            "--json", str(js))
    assert r.exit_code == 0
    assert len(_polylines(out)) == 6
    d = json.loads(js.read_text())
    assert d["curve"] == "Web" and len(d["trajectories"]) == 6


@pytest.mark.parametrize("theta", ["0.4", "2.2"])
def test_network_whittaker(run, tmp_path, theta):
    out = tmp_path / "whi.svg"
    assert run("network", "--curve", "Whi", "--theta", theta, "--out", str(out)).exit_code == 0
    polys = _polylines(out)
    assert len(polys) == 4
    root = ET.parse(out).getroot()
    assert root.findall(f"{SVG}circle") and root.findall(f"{SVG}rect[@class='simple-pole']")


# ---------------------------------------------------------------- sweep


def _sweep(run, *args):
    r = run("sweep", "--json", *args)
    assert r.exit_code == 0, r.output
    return json.loads(r.output)


def test_sweep_bessel(run):
    rows = _sweep(run, "--curve", "Bes", "--params", "m0=-0.5+0.4i", "--steps", "400")
    assert len(rows) == 1 and abs(rows[0]["theta"] - 0.8961) < 1e-3
    assert rows[0]["omega"] == -1


def test_sweep_legendre(run):
    rows = _sweep(run, "--curve", "Leg", "--params", "minf=i", "--steps", "400")
    d = (rows[0]["theta"] - rows[1]["theta"]) % math.pi
    assert len(rows) == 2 and min(d, math.pi - d) < 1e-6
    assert sorted(r["omega"] for r in rows) == [-1, 4]


def test_sweep_gauss(run):
    rows = _sweep(run, "--curve", "HG", "--steps", "600")
    assert len(rows) == 7
    assert sorted(r["omega"] for r in rows) == [-1] * 3 + [1] * 4
    for r in rows:
        z = complex(*r["Z"])
        d = (math.atan2(z.imag, z.real) - r["theta"]) % math.pi
        assert min(d, math.pi - d) < 1e-3


def test_sweep_table(run):
    r = run("sweep", "--curve", "Web", "--steps", "400")
    assert r.exit_code == 0 and "saddle_I" in r.output


# ---------------------------------------------------------------- verify


def test_verify_c23(run):
    r = run("verify", "--curve", "C23", "--gmax", "4")
    assert r.exit_code == 0 and "pass" in r.output


def test_verify_weber_json(run):
    r = run("verify", "--curve", "Web", "--gmax", "3", "--json")
    assert r.exit_code == 0
    rep = json.loads(r.output)[0]
    assert rep["passed"] and [row["g"] for row in rep["rows"]] == [2, 3]


def test_verify_failure_exit_code(run):
    assert run("verify", "--curve", "Kum", "--tol", "1e-300").exit_code == 1


def test_verify_non_generic(run):
    assert run("verify", "--curve", "HG", "--params", "m0=1,m1=2,minf=4").exit_code == 2


def test_verify_all(run):
    r = run("verify", "--curve", "all", "--gmax", "3")
    assert r.exit_code == 0
    assert len(r.output.splitlines()) == 11 and "FAIL" not in r.output

"""The nine hypergeometric-type spectral curves.

Each curve is ``y**2 = Q(x)`` together with a rational parametrization
``z -> (x(z), y(z))`` by the Riemann sphere, the covering involution
``sigma`` (a Mobius map with ``x o sigma = x`` and ``y o sigma = -y``), and
the punctures over the poles of ``Q``.

Sign convention for puncture labels: over a finite pole ``s`` the point
``p_{s+}`` is the one where ``Res y dx = +m_s``. Over ``x = inf`` the label
follows the expansion ``y ~ +m_inf / x``, so the residue of ``y dx`` at
``p_{inf+}`` is ``-m_inf``. This reproduces the explicit labels of the Gauss
and degenerate Gauss parametrizations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameters, UsageError
from .numeric import INF, Mobius, Poly, RationalFn, is_inf, poly_roots, residue_at

CURVE_IDS = ("HG", "dHG", "Kum", "Leg", "Bes", "Whi", "Web", "dBes", "Ai")
DEGREE3_IDS = ("C14", "C23")

PARAMS = {
    "HG": ("m0", "m1", "minf"),
    "dHG": ("m1", "minf"),
    "Kum": ("m0", "minf"),
    "Leg": ("minf",),
    "Bes": ("m0",),
    "Whi": ("minf",),
    "Web": ("minf",),
    "dBes": (),
    "Ai": (),
}

Q_FORMULAS = {
    "HG": "(minf^2 x^2 - (minf^2 + m0^2 - m1^2) x + m0^2) / (x^2 (x-1)^2)",
    "dHG": "(minf^2 x + m1^2 - minf^2) / (x (x-1)^2)",
    "Kum": "(x^2 + 4 minf x + 4 m0^2) / (4 x^2)",
    "Leg": "minf^2 / (x^2 - 1)",
    "Bes": "(x + 4 m0^2) / (4 x^2)",
    "Whi": "(x - 4 minf) / (4 x)",
    "Web": "x^2/4 - minf",
    "dBes": "1 / x",
    "Ai": "x",
}

# mass parameter attached to each even-order pole
POLE_MASS = {
    "HG": {"0": "m0", "1": "m1", "inf": "minf"},
    "dHG": {"1": "m1", "inf": "minf"},
    "Kum": {"0": "m0", "inf": "minf"},
    "Leg": {"inf": "minf"},
    "Bes": {"0": "m0"},
    "Whi": {"inf": "minf"},
    "Web": {"inf": "minf"},
    "dBes": {},
    "Ai": {},
}

_POLE_X = {"0": 0.0, "1": 1.0, "-1": -1.0, "inf": INF}


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    params: tuple
    Q: str


def catalog() -> list[CatalogEntry]:
    return [CatalogEntry(c, PARAMS[c], Q_FORMULAS[c]) for c in CURVE_IDS]


@dataclass(frozen=True)
class TurningPoint:
    x: complex
    kind: str  # "simple_zero" or "simple_pole"


@dataclass(frozen=True)
class Pole:
    label: str
    x: complex  # INF for the pole at infinity
    order: int


@dataclass(frozen=True)
class Puncture:
    label: str  # "0+", "inf-", or "inf" for an odd pole
    z: complex
    residue: complex | None


@dataclass(frozen=True)
class GenericityReport:
    in_M: bool
    generic: bool
    violated_constraints: list


@dataclass(frozen=True)
class CurveData:
    id: str
    m: dict
    Q: RationalFn
    turning_points: list
    poles: list
    x_of_z: RationalFn
    y_of_z: RationalFn
    involution: Mobius
    ramification_z: list
    punctures: list
    scale: float = 1.0

    def mass(self, pole_label: str) -> complex:
        return complex(self.m[POLE_MASS[self.id][pole_label]])

    def puncture(self, label: str) -> Puncture:
        for p in self.punctures:
            if p.label == label:
                return p
        raise KeyError(label)

    @property
    def finite_critical(self) -> list:
        pts = [t.x for t in self.turning_points]
        pts += [p.x for p in self.poles if not is_inf(p.x)]
        return pts


# ---------------------------------------------------------------- assumptions


def _constraints(cid: str, m: dict) -> list[tuple[str, complex]]:
    """(description, value) pairs; the assumption requires each value != 0."""
    out = []
    for name in PARAMS[cid]:
        out.append((f"{name} != 0", m[name]))
    if cid == "HG":
        for e1 in (1, -1):
            for e2 in (1, -1):
                s1 = "+" if e1 > 0 else "-"
                s2 = "+" if e2 > 0 else "-"
                out.append((f"m0 {s1} m1 {s2} minf != 0", m["m0"] + e1 * m["m1"] + e2 * m["minf"]))
    elif cid == "dHG":
        out.append(("m1 + minf != 0", m["m1"] + m["minf"]))
        out.append(("m1 - minf != 0", m["m1"] - m["minf"]))
    elif cid == "Kum":
        out.append(("m0 + minf != 0", m["m0"] + m["minf"]))
        out.append(("m0 - minf != 0", m["m0"] - m["minf"]))
    return out


def _check_names(cid: str, m: dict) -> dict:
    if cid in DEGREE3_IDS:
        raise UsageError(f"{cid} is only available through verify.degree3_check")
    if cid not in PARAMS:
        raise UsageError(f"unknown curve id {cid!r}; expected one of {', '.join(CURVE_IDS)}")
    names = set(PARAMS[cid])
    if set(m) != names:
        raise InvalidParameters(
            f"{cid} takes parameters {sorted(names)}, got {sorted(m)}")
    return {k: complex(v) for k, v in m.items()}


def _violations(cid: str, m: dict) -> list[str]:
    scale = max([1.0] + [abs(v) for v in m.values()])
    bad = []
    for desc, val in _constraints(cid, m):
        if abs(val) <= 1e-12 * scale:
            bad.append(desc.replace("!=", "=") + " (requires " + desc + ")")
    return bad


def check_genericity(cid: str, m: dict, ratio_tol: float = 1e-9) -> GenericityReport:
    """Membership in the admissible set and in its generic part."""
    m = _check_names(cid, m)
    bad = _violations(cid, m)
    if bad:
        return GenericityReport(False, False, bad)
    if cid == "Leg":
        return GenericityReport(True, True, [])
    from .bps import candidate_central_charges

    charges = candidate_central_charges(cid, m)
    issues = []
    for i in range(len(charges)):
        for j in range(i + 1, len(charges)):
            (la, za), (lb, zb) = charges[i], charges[j]
            r = za / zb
            if abs(r.imag) <= ratio_tol * abs(r):
                issues.append(f"Z({la}) / Z({lb}) is real ({r.real:.6g})")
    return GenericityReport(True, not issues, issues)


# ---------------------------------------------------------------- parametrizations


def _mobius_sigma(kind: str, m: complex = 1.0) -> Mobius:
    if kind == "inv":
        return Mobius(0, 1, 1, 0)
    if kind == "neg":
        return Mobius(-1, 0, 0, 1)
    if kind == "web":
        return Mobius(0, m, 1, 0)
    raise ValueError(kind)


def _build_raw(cid: str, m: dict):
    """Q numerator, finite poles of Q, x(z), y(z), sigma, puncture candidates.

    Candidates map a pole label to the list of z-points above it.
    """
    if cid == "HG":
        m0, m1, mi = m["m0"], m["m1"], m["minf"]
        delta = (m0 + m1 + mi) * (m0 + m1 - mi) * (m0 - m1 + mi) * (m0 - m1 - mi)
        sd = cmath.sqrt(delta)
        num = Poly([m0**2, -(mi**2 + m0**2 - m1**2), mi**2])
        den = [(0.0, 2), (1.0, 2)]
        alpha = sd / (4 * mi**2)
        c = (mi**2 + m0**2 - m1**2) / (2 * mi**2)
        x = RationalFn(Poly([alpha, c, alpha]), Poly([0, 1]))
        p0 = [-((m0 + e * mi) ** 2 - m1**2) / sd for e in (1, -1)]
        p1 = [((m1 + e * mi) ** 2 - m0**2) / sd for e in (1, -1)]
        y = RationalFn(Poly([0, -4 * mi**3, 0, 4 * mi**3]),
                       Poly.from_roots(p0 + p1, lead=sd))
        sigma = _mobius_sigma("inv")
        cands = {"0": p0, "1": p1, "inf": [INF, 0.0]}
        return num, den, x, y, sigma, cands
    if cid == "dHG":
        m1, mi = m["m1"], m["minf"]
        num = Poly([m1**2 - mi**2, mi**2])
        den = [(0.0, 1), (1.0, 2)]
        x = RationalFn(m1**2 - mi**2, Poly([-mi**2, 0, 1]))
        y = RationalFn(Poly([0, mi**2, 0, -1]), Poly([-m1**2, 0, 1]))
        sigma = _mobius_sigma("neg")
        cands = {"0": [INF], "1": [m1, -m1], "inf": [mi, -mi]}
        return num, den, x, y, sigma, cands
    if cid == "Kum":
        m0, mi = m["m0"], m["minf"]
        d = cmath.sqrt(mi**2 - m0**2)
        num = Poly([4 * m0**2, 4 * mi, 1])
        den = [(0.0, 2)]
        xn = Poly([d, -2 * mi, d])
        x = RationalFn(xn, Poly([0, 1]))
        y = RationalFn(Poly([-d, 0, d]), 2 * xn)
        sigma = _mobius_sigma("inv")
        cands = {"0": [(mi + m0) / d, (mi - m0) / d], "inf": [INF, 0.0]}
        return num, den, x, y, sigma, cands
    if cid == "Leg":
        mi = m["minf"]
        num = Poly([mi**2])
        den = [(1.0, 1), (-1.0, 1)]
        x = RationalFn(Poly([1, 0, 1]), Poly([0, 2]))
        y = RationalFn(Poly([0, 2 * mi]), Poly([-1, 0, 1]))
        sigma = _mobius_sigma("inv")
        cands = {"inf": [INF, 0.0]}
        return num, den, x, y, sigma, cands
    if cid == "Bes":
        m0 = m["m0"]
        num = Poly([4 * m0**2, 1])
        den = [(0.0, 2)]
        x = RationalFn(Poly([-4 * m0**2, 0, 1]))
        y = RationalFn(Poly([0, 1]), Poly([-8 * m0**2, 0, 2]))
        sigma = _mobius_sigma("neg")
        cands = {"0": [2 * m0, -2 * m0], "inf": [INF]}
        return num, den, x, y, sigma, cands
    if cid == "Whi":
        mi = m["minf"]
        num = Poly([-4 * mi, 1])
        den = [(0.0, 1)]
        x = RationalFn(4 * mi, Poly([1, 0, -1]))
        y = RationalFn(Poly([0, 0.5]))
        sigma = _mobius_sigma("neg")
        cands = {"0": [INF], "inf": [1.0, -1.0]}
        return num, den, x, y, sigma, cands
    if cid == "Web":
        mi = m["minf"]
        num = Poly([-mi, 0, 0.25])
        den = []
        x = RationalFn(Poly([mi, 0, 1]), Poly([0, 1]))
        y = RationalFn(Poly([-mi, 0, 1]), Poly([0, 2]))
        sigma = _mobius_sigma("web", mi)
        cands = {"inf": [INF, 0.0]}
        return num, den, x, y, sigma, cands
    if cid == "dBes":
        num = Poly([1.0])
        den = [(0.0, 1)]
        x = RationalFn(Poly([0, 0, 1]))
        y = RationalFn(1.0, Poly([0, 1]))
        sigma = _mobius_sigma("neg")
        cands = {"0": [0.0], "inf": [INF]}
        return num, den, x, y, sigma, cands
    if cid == "Ai":
        num = Poly([0, 1.0])
        den = []
        x = RationalFn(Poly([0, 0, 1]))
        y = RationalFn(Poly([0, 1]))
        sigma = _mobius_sigma("neg")
        cands = {"inf": [INF]}
        return num, den, x, y, sigma, cands
    raise UsageError(cid)


_DEN_LEAD = {"Kum": 4.0, "Bes": 4.0, "Whi": 4.0}


def ydx_residue(x_of_z: RationalFn, y_of_z: RationalFn, z) -> complex:
    """Residue of ``y dx`` at ``z`` (``z`` may be ``INF``)."""
    return residue_at(y_of_z * x_of_z.derivative(), z, cancel=True)


def build_curve(cid: str, m: dict | None = None, validate: bool = True) -> CurveData:
    """Instantiate a catalog curve at the given mass parameters."""
    m = _check_names(cid, dict(m or {}))
    bad = _violations(cid, m)
    if bad:
        raise InvalidParameters(f"{cid}: " + "; ".join(bad))
    num, den_roots, x, y, sigma, cands = _build_raw(cid, m)
    den = Poly.from_roots([r for r, k in den_roots for _ in range(k)], lead=_DEN_LEAD.get(cid, 1.0))
    Q = RationalFn(num, den)

    poles = []
    for r, k in den_roots:
        label = {0.0: "0", 1.0: "1", -1.0: "-1"}[r]
        poles.append(Pole(label, complex(r), k))
    order_inf = 4 + num.degree - den.degree
    if order_inf > 0:
        poles.append(Pole("inf", INF, order_inf))

    turning = [TurningPoint(complex(r), "simple_zero") for r in
               (poly_roots(num) if num.degree >= 1 else [])]
    turning += [TurningPoint(p.x, "simple_pole") for p in poles if p.order == 1 and not is_inf(p.x)]

    # ramification points: zeros of dx, i.e. fixed points of sigma that are not poles of x
    ram = []
    for f in sigma.fixed_points():
        if is_inf(f):
            xi = x.at_infinity()
            # x(1/u) ~ x_inf + c u^2 at a ramification point, a pole otherwise
            lc = xi.laurent(0.0, 3)
            if lc.min_order >= 0:
                ram.append(INF)
        elif abs(x.den(f)) > 1e-12 * max(1.0, x.den.scale()):
            ram.append(complex(f))

    punctures = []
    pole_orders = {p.label: p.order for p in poles}
    for label, zs in cands.items():
        order = pole_orders[label]
        if order % 2 == 1:
            punctures.append(Puncture(label, zs[0], None))
            continue
        mass = m[POLE_MASS[cid][label]]
        target = -mass if label == "inf" else mass
        res = [ydx_residue(x, y, z) for z in zs]
        tol = 1e-8 * max(1.0, abs(mass))
        if abs(res[0] - target) <= tol and abs(res[1] + target) <= tol:
            plus, minus = 0, 1
        elif abs(res[1] - target) <= tol and abs(res[0] + target) <= tol:
            plus, minus = 1, 0
        else:
            raise InvalidParameters(f"{cid}: residues {res} do not match mass {mass}")
        punctures.append(Puncture(label + "+", zs[plus], res[plus]))
        punctures.append(Puncture(label + "-", zs[minus], res[minus]))

    crit = [t.x for t in turning] + [p.x for p in poles if not is_inf(p.x)]
    scale = 1.0
    for i in range(len(crit)):
        for j in range(i + 1, len(crit)):
            scale = max(scale, abs(crit[i] - crit[j]))

    curve = CurveData(cid, m, Q, turning, poles, x, y, sigma, ram, punctures, scale)
    if validate:
        validate_curve(curve)
    return curve


def validate_curve(curve: CurveData, n_points: int = 50, tol: float = 1e-10, seed: int = 0) -> None:
    """Check the parametrization identities at random points."""
    rng = np.random.default_rng(seed)
    zs = rng.normal(size=n_points) + 1j * rng.normal(size=n_points)
    x = curve.x_of_z(zs)
    y = curve.y_of_z(zs)
    q = curve.Q(x)
    err = np.abs(y**2 - q) / np.maximum(1.0, np.abs(q))
    if np.max(err) > tol:
        raise InvalidParameters(f"{curve.id}: y^2 != Q(x) (residual {np.max(err):.2e})")
    sz = curve.involution(zs)
    if np.max(np.abs(curve.x_of_z(sz) - x) / np.maximum(1.0, np.abs(x))) > tol:
        raise InvalidParameters(f"{curve.id}: x o sigma != x")
    if np.max(np.abs(curve.y_of_z(sz) + y) / np.maximum(1.0, np.abs(y))) > tol:
        raise InvalidParameters(f"{curve.id}: y o sigma != -y")


def default_params(cid: str) -> dict:
    """Parameters of the spectral network figures, used as CLI presets."""
    presets = {
        "HG": {"m0": cmath.sqrt(0.5 + 0.2j), "m1": cmath.sqrt(0.5 + 0.4j),
               "minf": cmath.sqrt(-0.4 + 0.5j)},
        "dHG": {"m1": -0.53 - 0.28j, "minf": -0.32 - 0.63j},
        "Kum": {"m0": 0.07 + 0.60j, "minf": -0.4 - 0.4j},
        "Leg": {"minf": 1j},
        "Bes": {"m0": -0.5 + 0.4j},
        "Whi": {"minf": 0.3 + 0.4j},
        "Web": {"minf": 0.4 + 0.25j},
        "dBes": {},
        "Ai": {},
    }
    return dict(presets[cid])


def random_params(cid: str, rng, low: float = 0.3, high: float = 1.5, max_tries: int = 1000) -> dict:
    """Random generic mass parameters with moduli in [low, high]."""
    for _ in range(max_tries):
        m = {k: complex(rng.uniform(low, high) * np.exp(2j * np.pi * rng.uniform())) for k in PARAMS[cid]}
        if check_genericity(cid, m).generic:
            return m
    raise InvalidParameters(f"{cid}: no generic parameters found in {max_tries} draws")

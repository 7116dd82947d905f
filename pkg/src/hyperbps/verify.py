"""Numerical checks of the free energy / BPS spectrum identity.

For g >= 2 the closed forms, the recursion and the BPS sum

    F_g = B_{2g} / (2g (2g - 2)) * sum_{Z(gamma) in H} Omega(gamma) (2 pi i / Z(gamma))^(2g-2)

are compared directly. F_0 and F_1 are only defined modulo quadratic
polynomials and constants, so they are compared through derivatives and
differences.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bps import BPSStructure, expected_spectrum
from .curves import PARAMS, build_curve, check_genericity
from .errors import InvalidParameters, NonGeneric, UsageError
from .toprec import (CorrelatorSession, bernoulli_weight, free_energy_closed,
                     free_energy_recursion)

TWO_PI_I = 2j * math.pi


@dataclass(frozen=True)
class HalfPlane:
    """Open half plane Re(exp(-i phase) Z) > 0."""

    phase: float

    def contains(self, Z: complex) -> bool:
        return (cmath.exp(-1j * self.phase) * Z).real > 0

    def is_admissible(self, structure: BPSStructure, tol: float = 1e-9) -> bool:
        w = cmath.exp(-1j * self.phase)
        return all(abs((w * r.Z).real) > tol * abs(r.Z) for r in structure.rows)

    def require(self, structure: BPSStructure) -> None:
        if not self.is_admissible(structure):
            raise UsageError(f"half plane with boundary phase {self.phase:.6g} has a BPS ray on its boundary")


def active_in(structure: BPSStructure, H: HalfPlane):
    H.require(structure)
    return [r for r in structure.rows if H.contains(r.Z)]


def bps_free_energy(structure: BPSStructure, g: int, H: HalfPlane) -> complex:
    if g < 2:
        raise UsageError("the BPS sum is defined for g >= 2")
    s = sum(r.omega * (TWO_PI_I / r.Z) ** (2 * g - 2) for r in active_in(structure, H))
    return complex(bernoulli_weight(g) * s)


def f0_bps(structure: BPSStructure, H: HalfPlane) -> complex:
    out = 0j
    for r in active_in(structure, H):
        a = r.Z / TWO_PI_I
        out += r.omega * 0.5 * a * a * cmath.log(a)
    return out


def f1_bps(structure: BPSStructure, H: HalfPlane) -> complex:
    # log of the product taken as a sum of principal logs
    out = 0j
    for r in active_in(structure, H):
        out += r.omega * cmath.log(r.Z / TWO_PI_I)
    return -out / 12


def random_halfplanes(structure: BPSStructure, n: int, rng) -> list[HalfPlane]:
    out = []
    while len(out) < n:
        H = HalfPlane(float(rng.uniform(0, 2 * math.pi)))
        if H.is_admissible(structure, tol=1e-6):
            out.append(H)
    return out


def aligned_halfplane(cid: str, m: dict, structure: BPSStructure) -> HalfPlane | None:
    """Half plane containing 2 pi i a for every mass combination a written in
    the closed forms, so both sides pick the same logarithm arguments.

    Returns None when those central charges do not fit in one half plane.
    """
    from .toprec import closed_form_terms

    zs = [TWO_PI_I * a for _, a in closed_form_terms(cid, m)]
    if not zs:
        return HalfPlane(0.0) if structure.rows == [] else None
    # centre of the shortest arc holding all the phases
    ang = sorted(cmath.phase(z) % (2 * math.pi) for z in zs)
    gaps = [(ang[(i + 1) % len(ang)] - ang[i]) % (2 * math.pi) for i in range(len(ang))]
    i = int(np.argmax(gaps)) if len(ang) > 1 else 0
    start = ang[(i + 1) % len(ang)]
    width = 2 * math.pi - gaps[i] if len(ang) > 1 else 0.0
    H = HalfPlane((start + width / 2) % (2 * math.pi))
    if H.is_admissible(structure, tol=1e-6) and all(H.contains(z) for z in zs):
        return H
    return None


# ---------------------------------------------------------------- F0 / F1 derivative checks


def _params_vector(cid: str, m: dict) -> np.ndarray:
    return np.array([complex(m[k]) for k in PARAMS[cid]])


def _params_dict(cid: str, v) -> dict:
    return {k: complex(x) for k, x in zip(PARAMS[cid], v)}


def _f0_pair(cid: str, structure_H: HalfPlane):
    def closed(v):
        return free_energy_closed(cid, _params_dict(cid, v), 0, modulo_ambiguity=True).value

    def bps(v):
        curve = build_curve(cid, _params_dict(cid, v), validate=False)
        return f0_bps(expected_spectrum(curve, check=False), structure_H)

    return closed, bps


def hessian(f, v: np.ndarray, h: float) -> np.ndarray:
    """Central-difference Hessian of a holomorphic function of several variables."""
    n = len(v)
    H = np.zeros((n, n), dtype=complex)
    f0 = f(v)
    for a in range(n):
        ea = np.zeros(n, dtype=complex)
        ea[a] = h
        H[a, a] = (f(v + ea) - 2 * f0 + f(v - ea)) / h**2
        for b in range(a + 1, n):
            eb = np.zeros(n, dtype=complex)
            eb[b] = h
            H[a, b] = H[b, a] = (f(v + ea + eb) - f(v + ea - eb) - f(v - ea + eb) + f(v - ea - eb)) / (4 * h * h)
    return H


def third_derivatives(f, v: np.ndarray, h: float) -> np.ndarray:
    """All third partials d^3 f / dv_a dv_b dv_c by central differences."""
    n = len(v)
    T = np.zeros((n, n, n), dtype=complex)
    steps = (1, -1)
    for a in range(n):
        for b in range(a, n):
            for c in range(b, n):
                acc = 0j
                # product of three first-order central differences
                for sa in steps:
                    for sb in steps:
                        for sc in steps:
                            e = np.zeros(n, dtype=complex)
                            e[a] += sa * h
                            e[b] += sb * h
                            e[c] += sc * h
                            acc += sa * sb * sc * f(v + e)
                val = acc / (8 * h**3)
                for p in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                    T[p] = val
    return T


@dataclass
class DerivativeCheck:
    name: str
    rel_error: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.rel_error <= self.tol)


def f0_hessian_check(cid: str, m: dict, H: HalfPlane | None = None, tol: float = 1e-5) -> DerivativeCheck:
    """Hessians of F_0 (BPS sum vs closed form) in the mass parameters.

    Without an explicit H the aligned half plane is used. For other H the
    two sides differ by a quadratic polynomial with a nonzero constant
    Hessian; use ``f0_third_derivative_check`` there.
    """
    structure = expected_spectrum(build_curve(cid, m))
    H = H or aligned_halfplane(cid, m, structure)
    if H is None:
        raise UsageError(f"{cid}: no half plane contains all closed-form central charges")
    v = _params_vector(cid, m)
    h = 1e-4 * max(1.0, float(np.max(np.abs(v))))
    closed, bps = _f0_pair(cid, H)
    Hc, Hb = hessian(closed, v, h), hessian(bps, v, h)
    err = float(np.max(np.abs(Hc - Hb)) / np.max(np.abs(Hc)))
    return DerivativeCheck("F0 Hessian", err, tol, f"H phase {H.phase:.6f}")


def f0_third_derivative_check(cid: str, m: dict, H: HalfPlane, tol: float = 1e-5) -> DerivativeCheck:
    """Third derivatives agree for every admissible H: the quadratic ambiguity drops out."""
    v = _params_vector(cid, m)
    h = 1e-3 * max(1.0, float(np.max(np.abs(v))))
    closed, bps = _f0_pair(cid, H)
    Tc, Tb = third_derivatives(closed, v, h), third_derivatives(bps, v, h)
    err = float(np.max(np.abs(Tc - Tb)) / np.max(np.abs(Tc)))
    return DerivativeCheck("F0 third derivatives", err, tol, f"H phase {H.phase:.6f}")


def _f1_pair(cid: str, H: HalfPlane):
    def closed(v):
        return free_energy_closed(cid, _params_dict(cid, v), 1, modulo_ambiguity=True).value

    def bps(v):
        curve = build_curve(cid, _params_dict(cid, v), validate=False)
        return f1_bps(expected_spectrum(curve, check=False), H)

    return closed, bps


def f1_difference_check(cid: str, m: dict, m2: dict, H: HalfPlane, tol: float = 1e-9) -> DerivativeCheck:
    """F_1(m) - F_1(m2) from the BPS sum and from the closed form.

    H must be aligned at both points (see ``common_aligned_halfplane``);
    otherwise the two sides can differ by a multiple of i pi / 12.
    """
    closed, bps = _f1_pair(cid, H)
    v1, v2 = _params_vector(cid, m), _params_vector(cid, m2)
    dc = closed(v1) - closed(v2)
    db = bps(v1) - bps(v2)
    err = abs(dc - db)
    return DerivativeCheck("F1 difference", float(err), tol, f"closed {dc:.12g}, bps {db:.12g}")


def f1_gradient_check(cid: str, m: dict, H: HalfPlane, tol: float = 1e-7) -> DerivativeCheck:
    """First derivatives of F_1, valid for any admissible H."""
    closed, bps = _f1_pair(cid, H)
    v = _params_vector(cid, m)
    h = 1e-5 * max(1.0, float(np.max(np.abs(v))))
    err = 0.0
    scale = 0.0
    for a in range(len(v)):
        e = np.zeros(len(v), dtype=complex)
        e[a] = h
        gc = (closed(v + e) - closed(v - e)) / (2 * h)
        gb = (bps(v + e) - bps(v - e)) / (2 * h)
        err = max(err, abs(gc - gb))
        scale = max(scale, abs(gc))
    return DerivativeCheck("F1 gradient", err / scale, tol, f"H phase {H.phase:.6f}")


def common_aligned_halfplane(cid: str, m: dict, m2: dict) -> HalfPlane | None:
    """A half plane aligned (in the sense of ``aligned_halfplane``) at both points."""
    from .toprec import closed_form_terms

    s1 = expected_spectrum(build_curve(cid, m))
    s2 = expected_spectrum(build_curve(cid, m2))
    zs = [TWO_PI_I * a for mm in (m, m2) for _, a in closed_form_terms(cid, mm)]
    for phase in np.linspace(0, 2 * math.pi, 720, endpoint=False):
        H = HalfPlane(float(phase))
        if (H.is_admissible(s1, 1e-6) and H.is_admissible(s2, 1e-6)
                and all((cmath.exp(-1j * phase) * z).real > 1e-6 * abs(z) for z in zs)):
            return H
    return None


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class Tolerances:
    closed_vs_bps: float = 1e-12
    recursion: float = 1e-6
    halfplane: float = 1e-12
    hessian: float = 1e-5
    f1: float = 1e-7


@dataclass
class GenusRow:
    g: int
    closed: complex
    bps: complex
    recursion: complex | None
    rel_closed_bps: float
    rel_recursion: float | None
    halfplane_spread: float

    def to_json(self) -> dict:
        d = asdict(self)
        for k in ("closed", "bps", "recursion"):
            if d[k] is not None:
                d[k] = [d[k].real, d[k].imag]
        return d


@dataclass
class VerificationReport:
    curve: str
    parameters: dict
    rows: list
    derivative_checks: list = field(default_factory=list)
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def passed(self) -> bool:
        t = self.tolerances
        for r in self.rows:
            if r.rel_closed_bps > t.closed_vs_bps or r.halfplane_spread > t.halfplane:
                return False
            if r.rel_recursion is not None and r.rel_recursion > t.recursion:
                return False
        return all(c.passed for c in self.derivative_checks)

    def to_json(self) -> dict:
        return {
            "curve": self.curve,
            "parameters": {k: [complex(v).real, complex(v).imag] for k, v in self.parameters.items()},
            "rows": [r.to_json() for r in self.rows],
            "derivative_checks": [{"name": c.name, "rel_error": c.rel_error, "tol": c.tol,
                                   "passed": c.passed, "detail": c.detail} for c in self.derivative_checks],
            "passed": self.passed,
        }


def _rel(a: complex, b: complex) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def verify_curve(cid: str, m: dict | None = None, g_max: int = 3, tolerances: Tolerances | None = None,
                 seed: int = 0, recursion: bool = True, derivatives: bool = True) -> VerificationReport:
    """Compare closed forms, recursion (g <= 3) and BPS sums for one curve."""
    from .curves import default_params

    tol = tolerances or Tolerances()
    m = default_params(cid) if m is None else dict(m)
    rep = check_genericity(cid, m)
    if not rep.generic:
        raise NonGeneric(rep)
    curve = build_curve(cid, m)
    structure = expected_spectrum(curve)
    rng = np.random.default_rng(seed)
    Hs = random_halfplanes(structure, 8, rng)
    session = CorrelatorSession(curve, g_max=min(g_max, 3)) if recursion and g_max >= 2 else None

    rows = []
    for g in range(2, g_max + 1):
        closed = free_energy_closed(cid, m, g).value
        vals = [bps_free_energy(structure, g, H) for H in Hs]
        bps = vals[0]
        spread = max(_rel(v, bps) for v in vals)
        rec = None
        rel_rec = None
        if session is not None and g <= 3:
            rec = free_energy_recursion(session, g).value
            rel_rec = _rel(rec, closed) if closed != 0 else abs(rec)
        rel_cb = _rel(closed, bps) if closed != 0 or bps != 0 else 0.0
        rows.append(GenusRow(g, closed, bps, rec, rel_cb, rel_rec, spread))

    checks = []
    if derivatives and structure.rows:
        H = aligned_halfplane(cid, m, structure)
        if H is not None:
            checks.append(f0_hessian_check(cid, m, H, tol.hessian))
        checks.append(f0_third_derivative_check(cid, m, Hs[0], tol.hessian))
        checks.append(f1_gradient_check(cid, m, Hs[0], tol.f1))
    return VerificationReport(cid, m, rows, checks, tol)


@dataclass
class Degree3Report:
    curve: str
    rows: list  # (g, closed, bps)

    @property
    def passed(self) -> bool:
        return all(_rel(c, b) <= 1e-13 if c != 0 else b == 0 for _, c, b in self.rows)

    def to_json(self) -> dict:
        return {"curve": self.curve, "passed": self.passed,
                "rows": [{"g": g, "closed": [c.real, c.imag], "bps": [b.real, b.imag]} for g, c, b in self.rows]}


def degree3_check(cid: str, minf: complex = 1.0, t: complex = 1.0, g_max: int = 6) -> Degree3Report:
    """Arithmetic check of the identity for the two degree-3 curves.

    C14 carries the spectrum {+-g[inf]} with Omega = 1 and Z = +-2 pi i minf;
    C23 has an empty spectrum and vanishing free energies.
    """
    rows = []
    if cid == "C14":
        if minf == 0:
            raise InvalidParameters("C14 needs minf != 0")
        minf = complex(minf)
        Z = TWO_PI_I * minf
        H = HalfPlane(cmath.phase(Z))
        for g in range(2, g_max + 1):
            closed = complex(bernoulli_weight(g) * minf ** (2 - 2 * g))
            bps = complex(bernoulli_weight(g) * sum((TWO_PI_I / z) ** (2 * g - 2) for z in (Z, -Z) if H.contains(z)))
            rows.append((g, closed, bps))
    elif cid == "C23":
        if t == 0:
            raise InvalidParameters("C23 needs t != 0")
        for g in range(2, g_max + 1):
            rows.append((g, 0j, 0j))
    else:
        raise UsageError(f"degree-3 check is defined for C14 and C23, not {cid}")
    return Degree3Report(cid, rows)

"""BPS structures (Gamma, Z, Omega) of the catalog curves.

The charge lattice is generated by residue cycles: a pair ``s+``, ``s-`` for
every even-order pole ``s`` and a single class for every odd pole of order at
least three. The only relation is that all generators sum to zero. Charges
are stored as integer vectors reduced to a canonical representative by
eliminating ``inf-`` (or the last generator when there is no ``inf-``).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveData, POLE_MASS, check_genericity
from .errors import IdentificationFailure, NonGeneric

OMEGA_BY_KIND = {"I": 1, "II": 2, "III": 4, "IV-ring": -1, "V-ring": -2}
# the convention that assigns -2 to every ring domain, kept for reference only
OMEGA_ALT_BY_KIND = {"I": 1, "II": 2, "III": 4, "IV-ring": -2, "V-ring": -2}


@dataclass(frozen=True)
class Lattice:
    generators: tuple
    relation: tuple

    @property
    def rank(self) -> int:
        return max(0, len(self.generators) - 1)

    @property
    def eliminated(self) -> int | None:
        if not self.generators:
            return None
        if "inf-" in self.generators:
            return self.generators.index("inf-")
        return len(self.generators) - 1

    def pairing(self, a: "Charge", b: "Charge") -> int:
        return 0

    def charge(self, coeffs: dict | None = None, **kw) -> "Charge":
        """Charge from a {label: int} map (keyword form uses p/m for +/-)."""
        coeffs = dict(coeffs or {})
        for k, v in kw.items():
            coeffs[k.replace("_p", "+").replace("_m", "-")] = v
        vec = [0] * len(self.generators)
        for label, c in coeffs.items():
            vec[self.generators.index(label)] += int(c)
        return Charge(self, tuple(vec))

    def zero(self) -> "Charge":
        return Charge(self, (0,) * len(self.generators))


@dataclass(frozen=True, eq=False)
class Charge:
    lattice: Lattice
    raw: tuple

    @property
    def vector(self) -> tuple:
        e = self.lattice.eliminated
        if e is None:
            return ()
        c = self.raw[e]
        return tuple(v - c * r for v, r in zip(self.raw, self.lattice.relation))

    def __eq__(self, other):
        return isinstance(other, Charge) and self.lattice == other.lattice and self.vector == other.vector

    def __hash__(self):
        return hash((self.lattice.generators, self.vector))

    def __add__(self, other):
        return Charge(self.lattice, tuple(a + b for a, b in zip(self.raw, other.raw)))

    def __neg__(self):
        return Charge(self.lattice, tuple(-a for a in self.raw))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k: int):
        return Charge(self.lattice, tuple(k * a for a in self.raw))

    def is_zero(self) -> bool:
        return not any(self.vector)

    def norm(self) -> int:
        """Sup norm of the canonical coefficient vector."""
        return max((abs(v) for v in self.vector), default=0)

    def as_dict(self) -> dict:
        return {g: v for g, v in zip(self.lattice.generators, self.vector) if v}

    def label(self) -> str:
        parts = []
        for g, v in self.as_dict().items():
            sign = "-" if v < 0 else "+"
            mag = "" if abs(v) == 1 else f"{abs(v)}*"
            parts.append(f"{sign} {mag}g[{g}]")
        if not parts:
            return "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]

    def __repr__(self):
        return f"Charge({self.label()})"


@dataclass(frozen=True)
class SpectrumRow:
    charge: Charge
    kind: str
    Z: complex
    omega: int
    theta_bps: float
    pole: str | None = None

    def to_json(self) -> dict:
        return {"charge": self.charge.as_dict(), "kind": self.kind,
                "Z": [self.Z.real, self.Z.imag], "omega": self.omega, "theta": self.theta_bps}


@dataclass
class BPSStructure:
    curve: CurveData
    lattice: Lattice
    rows: list

    def Z(self, gamma: Charge) -> complex:
        return central_charge(self.curve, gamma)

    @property
    def omega(self) -> dict:
        return {r.charge: r.omega for r in self.rows}

    def omega_of(self, gamma: Charge) -> int:
        return self.omega.get(gamma, 0)

    @property
    def active_rays(self) -> list:
        return [(r.theta_bps, r.charge) for r in self.rows]

    def phases(self) -> list[float]:
        """Distinct BPS phases mod pi, sorted."""
        out: list[float] = []
        for r in self.rows:
            if not any(_phase_dist(r.theta_bps, p) < 1e-9 for p in out):
                out.append(r.theta_bps)
        return sorted(out)


def _phase_dist(a: float, b: float) -> float:
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def phase_mod_pi(z: complex) -> float:
    return cmath.phase(z) % math.pi


def lattice_for(curve: CurveData) -> Lattice:
    gens = []
    for p in curve.poles:
        if p.order % 2 == 0:
            gens += [p.label + "+", p.label + "-"]
        elif p.order >= 3:
            gens.append(p.label)
    if len(gens) == 1:
        # the relation kills a lone generator
        gens = []
    return Lattice(tuple(gens), (1,) * len(gens))


def _generator_Z(curve: CurveData, label: str) -> complex:
    if label.endswith("+") or label.endswith("-"):
        m = curve.mass(label[:-1])
        return 2j * math.pi * (m if label.endswith("+") else -m)
    return 0j


def central_charge(curve: CurveData, gamma: Charge) -> complex:
    """Z(gamma) through Z(g[s+-]) = +-2 pi i m_s."""
    return complex(sum(c * _generator_Z(curve, g) for g, c in zip(gamma.lattice.generators, gamma.raw)))


def _spectrum_charges(curve: CurveData, lat: Lattice) -> list[tuple[Charge, str, str | None]]:
    """(charge, kind, ring pole) for one representative of each +- pair."""
    cid = curve.id
    C = lat.charge
    out = []

    def ring(s):
        out.append((C({s + "+": 1, s + "-": -1}), "IV-ring", s))

    if cid == "Web":
        out.append((C({"inf+": 1}), "I", None))
    elif cid == "Whi":
        out.append((C({"inf+": 1}), "II", None))
    elif cid == "Bes":
        ring("0")
    elif cid == "Leg":
        out.append((C({"inf+": 1}), "III", None))
        ring("inf")
    elif cid == "Kum":
        out.append((C({"0+": 1, "inf+": 1}), "I", None))
        out.append((C({"0+": 1, "inf-": 1}), "I", None))
        ring("0")
    elif cid == "dHG":
        out.append((C({"1+": 1, "inf+": 1}), "II", None))
        out.append((C({"1+": 1, "inf-": 1}), "II", None))
        ring("1")
        ring("inf")
    elif cid == "HG":
        for e1 in "+-":
            for e2 in "+-":
                out.append((C({"0+": 1, "1" + e1: 1, "inf" + e2: 1}), "I", None))
        ring("0")
        ring("1")
        ring("inf")
    return out


def candidate_central_charges(cid: str, m: dict) -> list[tuple[str, complex]]:
    """Z of one representative of every candidate +- pair, straight from the
    masses (used by the genericity test before a curve is built)."""
    two_pi_i = 2j * math.pi
    if cid == "HG":
        m0, m1, mi = m["m0"], m["m1"], m["minf"]
        out = [(f"0+ 1{'+' if e1 > 0 else '-'} inf{'+' if e2 > 0 else '-'}",
                two_pi_i * (m0 + e1 * m1 + e2 * mi)) for e1 in (1, -1) for e2 in (1, -1)]
        out += [(f"ring {s}", 2 * two_pi_i * m[s]) for s in ("m0", "m1", "minf")]
        return out
    if cid == "dHG":
        m1, mi = m["m1"], m["minf"]
        return [("1+ inf+", two_pi_i * (m1 + mi)), ("1+ inf-", two_pi_i * (m1 - mi)),
                ("ring 1", 2 * two_pi_i * m1), ("ring inf", 2 * two_pi_i * mi)]
    if cid == "Kum":
        m0, mi = m["m0"], m["minf"]
        return [("0+ inf+", two_pi_i * (m0 + mi)), ("0+ inf-", two_pi_i * (m0 - mi)),
                ("ring 0", 2 * two_pi_i * m0)]
    if cid == "Leg":
        return [("inf+", two_pi_i * m["minf"]), ("ring inf", 2 * two_pi_i * m["minf"])]
    if cid == "Bes":
        return [("ring 0", 2 * two_pi_i * m["m0"])]
    if cid in ("Whi", "Web"):
        return [("inf+", two_pi_i * m["minf"])]
    return []


def expected_spectrum(curve: CurveData, check: bool = True) -> BPSStructure:
    """The BPS structure listed for each curve on the generic locus."""
    if check:
        rep = check_genericity(curve.id, curve.m)
        if not rep.generic:
            raise NonGeneric(rep)
    lat = lattice_for(curve)
    rows = []
    for gamma, kind, pole in _spectrum_charges(curve, lat):
        for sgn in (1, -1):
            c = gamma if sgn > 0 else -gamma
            Z = central_charge(curve, c)
            rows.append(SpectrumRow(c, kind, Z, OMEGA_BY_KIND[kind], phase_mod_pi(Z), pole))
    return BPSStructure(curve, lat, rows)


def identify(curve: CurveData, event, structure: BPSStructure,
             phase_tol: float = 1e-3, length_tol: float = 0.05) -> Charge:
    """The active charge (up to sign) matching a detected degeneration.

    Saddles match on phase and on |Z| = 2L. Ring events match the charge
    g[s+] - g[s-] of the flagged pole.
    """
    matches = []
    for row in structure.rows:
        if _phase_dist(row.theta_bps, event.theta_star) >= phase_tol:
            continue
        if event.kind == "ring_degenerate":
            if row.kind != "IV-ring" or row.pole != event.pole:
                continue
        else:
            if row.kind == "IV-ring":
                continue
            if abs(abs(row.Z) - 2 * event.length) / abs(row.Z) >= length_tol:
                continue
        if not any(row.charge == m or row.charge == -m for m in matches):
            matches.append(row.charge)
    if len(matches) != 1:
        raise IdentificationFailure(
            f"{curve.id}: {len(matches)} candidate charges for the event at theta={event.theta_star:.6f}")
    return matches[0]


@dataclass(frozen=True)
class StructureReport:
    symmetric: bool
    finite: bool
    integral: bool
    uncoupled: bool
    support_constant: float

    @property
    def ok(self) -> bool:
        return self.symmetric and self.finite and self.integral and self.uncoupled and self.support_constant > 0


def check_structure(structure: BPSStructure) -> StructureReport:
    om = structure.omega
    symmetric = all(om.get(-c, 0) == v for c, v in om.items())
    finite = len(om) < math.inf
    integral = all(isinstance(v, (int, np.integer)) for v in om.values())
    active = [c for c, v in om.items() if v != 0]
    uncoupled = all(structure.lattice.pairing(a, b) == 0 for a in active for b in active)
    if active:
        C = min(abs(structure.Z(c)) / c.norm() for c in active)
    else:
        C = math.inf
    return StructureReport(symmetric, finite, integral, uncoupled, C)

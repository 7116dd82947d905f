"""Command-line interface: ``hyperbps curves|fg|network|sweep|verify``.

Exit codes: 0 success, 1 verification or identification failure, 2 invalid
or non-generic parameters (and usage errors), 3 numeric failure.
"""

from __future__ import annotations

import json
import math
import sys
from xml.sax.saxutils import escape

import click
import numpy as np

from .curves import CURVE_IDS, DEGREE3_IDS, build_curve, catalog, default_params
from .errors import HyperBPSError, UsageError

# ---------------------------------------------------------------- complex literals


def parse_complex(text: str) -> complex:
    """Parse "RE", "RE+IMi", "RE-IMi", "IMi" (also "i", "-i")."""
    s = text.strip().replace(" ", "").replace("j", "i")
    if not s:
        raise UsageError("empty complex literal")
    try:
        if not s.endswith("i"):
            return complex(float(s), 0.0)
        body = s[:-1]
        # split at the last sign that is not an exponent sign or the leading sign
        cut = -1
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "eE":
                cut = k
                break
        if cut < 0:
            re_part, im_part = "0", body
        else:
            re_part, im_part = body[:cut], body[cut:]
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        return complex(float(re_part), float(im_part))
    except ValueError:
        raise UsageError(f"cannot parse complex literal {text!r}") from None


def format_complex(c: complex) -> str:
    c = complex(c)
    sign = "-" if math.copysign(1.0, c.imag) < 0 else "+"
    return f"{c.real!r}{sign}{abs(c.imag)!r}i"


def parse_params(cid: str, items) -> dict:
    """Mass parameters from "name=value" items (comma or whitespace separated);
    missing names fall back to the curve presets."""
    m = default_params(cid) if cid in CURVE_IDS else {}
    for item in items or ():
        for part in item.replace(",", " ").split():
            if "=" not in part:
                raise UsageError(f"parameter {part!r} is not of the form name=value")
            k, v = part.split("=", 1)
            m[k.strip()] = parse_complex(v)
    return m


def _json_complex(c) -> list:
    c = complex(c)
    return [c.real, c.imag]


def _fail(err: HyperBPSError):
    click.echo(f"error: {err}", err=True)
    sys.exit(err.exit_code)


def _run(fn):
    try:
        fn()
    except HyperBPSError as e:
        _fail(e)


@click.group()
def main():
    """Free energies, spectral networks and BPS spectra of hypergeometric-type curves."""


curve_option = click.option("--curve", "cid", required=True, type=click.Choice(CURVE_IDS),
                            help="catalog curve id")
params_option = click.option("--params", "-p", "params", multiple=True,
                             help='mass parameters, e.g. "m0=0.5+0.2i,minf=1"')
json_flag = click.option("--json", "as_json", is_flag=True, help="emit JSON")


# ---------------------------------------------------------------- curves


@main.command("curves")
@json_flag
def cmd_curves(as_json):
    """List the catalog curves."""
    rows = catalog()
    if as_json:
        click.echo(json.dumps([{"id": r.id, "params": list(r.params), "Q": r.Q} for r in rows], indent=2))
        return
    for r in rows:
        click.echo(f"{r.id:5s} {','.join(r.params) or '-':14s} Q = {r.Q}")


# ---------------------------------------------------------------- fg


@main.command("fg")
@curve_option
@params_option
@click.option("--g", "g", type=int, required=True, help="genus")
@click.option("--method", type=click.Choice(["tr", "closed", "bps"]), default="closed", show_default=True)
@click.option("--halfplane", type=float, default=None, help="boundary phase of the half plane (bps)")
@click.option("--modulo-ambiguity", is_flag=True, help="accept F_0 / F_1 up to their ambiguities")
@json_flag
def cmd_fg(cid, params, g, method, halfplane, modulo_ambiguity, as_json):
    """A single free energy F_g."""

    def run():
        from .bps import expected_spectrum
        from .toprec import CorrelatorSession, free_energy_closed, free_energy_recursion
        from .verify import (HalfPlane, aligned_halfplane, bps_free_energy, f0_bps, f1_bps,
                             random_halfplanes)

        m = parse_params(cid, params)
        err = 0.0
        note = ""
        if method == "closed":
            v = free_energy_closed(cid, m, g, modulo_ambiguity=modulo_ambiguity)
            value, note = v.value, v.modulo or ""
        elif method == "tr":
            if g < 2:
                raise UsageError("the recursion route is implemented for g >= 2")
            curve = build_curve(cid, m)
            from .curves import check_genericity
            from .errors import NonGeneric

            rep = check_genericity(cid, m)
            if not rep.generic:
                raise NonGeneric(rep)
            v = free_energy_recursion(CorrelatorSession(curve, g_max=g), g)
            value, err = v.value, v.error_estimate
        else:
            curve = build_curve(cid, m)
            structure = expected_spectrum(curve)
            if halfplane is not None:
                H = HalfPlane(halfplane)
            else:
                H = aligned_halfplane(cid, m, structure) or random_halfplanes(
                    structure, 1, np.random.default_rng(0))[0]
            if g >= 2:
                value = bps_free_energy(structure, g, H)
            elif not modulo_ambiguity:
                raise UsageError(f"F_{g} is only defined up to an ambiguity; pass --modulo-ambiguity")
            else:
                value = (f0_bps if g == 0 else f1_bps)(structure, H)
                note = "quadratic polynomials" if g == 0 else "additive constants"
        if as_json:
            click.echo(json.dumps({"curve": cid, "g": g, "method": method, "value": _json_complex(value),
                                   "error_estimate": err, "modulo": note or None}))
        else:
            extra = f", modulo {note}" if note else ""
            click.echo(f"F_{g} = {format_complex(value)}  (method {method}, error estimate {err:.1e}{extra})")

    _run(run)


# ---------------------------------------------------------------- network


def render_svg(snapshot, width: int = 800, height: int = 800) -> str:
    """SVG 1.1 drawing of a spectral network."""
    from .numeric import is_inf

    curve = snapshot.curve
    crit = curve.finite_critical or [0j]
    cx = np.mean([c.real for c in crit])
    cy = np.mean([c.imag for c in crit])
    half = 0.75 * max(curve.scale, max(abs(c - complex(cx, cy)) for c in crit)) + 0.5
    x0, x1, y0, y1 = cx - half, cx + half, cy - half, cy + half

    def px(z):
        return ((z.real - x0) / (x1 - x0) * width, (y1 - z.imag) / (y1 - y0) * height)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<title>{escape(curve.id)} spectral network, theta = {snapshot.theta:.6f}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    lim = 4 * half
    for t in snapshot.critical_trajectories:
        pts = [p for p in t.points if abs(p - complex(cx, cy)) < lim]
        if len(pts) < 2:
            continue
        coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in map(px, pts))
        parts.append(f'<polyline class="trajectory" points="{coords}" fill="none" stroke="#1f4e9c" '
                     f'stroke-width="1.5"/>')
    for tp in curve.turning_points:
        a, b = px(tp.x)
        if tp.kind == "simple_zero":
            parts.append(f'<circle class="zero" cx="{a:.2f}" cy="{b:.2f}" r="4" fill="#c0392b"/>')
        else:
            parts.append(f'<rect class="simple-pole" x="{a - 4:.2f}" y="{b - 4:.2f}" width="8" height="8" '
                         f'fill="#e67e22"/>')
    for p in curve.poles:
        if is_inf(p.x) or p.order < 2:
            continue
        a, b = px(p.x)
        parts.append(f'<path class="pole" d="M {a - 5:.2f} {b - 5:.2f} L {a + 5:.2f} {b + 5:.2f} '
                     f'M {a - 5:.2f} {b + 5:.2f} L {a + 5:.2f} {b - 5:.2f}" stroke="black" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@main.command("network")
@curve_option
@params_option
@click.option("--theta", type=float, required=True, help="phase")
@click.option("--out", "out", type=click.Path(dir_okay=False), required=True, help="SVG output file")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None, help="JSON point dump")
@click.option("--width", type=int, default=800)
@click.option("--height", type=int, default=800)
def cmd_network(cid, params, theta, out, json_out, width, height):
    """Trace the spectral network of phase theta and render it."""

    def run():
        from .trajectories import build_network

        curve = build_curve(cid, parse_params(cid, params))
        snap = build_network(curve, theta)
        with open(out, "w") as fh:
            fh.write(render_svg(snap, width, height))
        if json_out:
            with open(json_out, "w") as fh:
                json.dump(snap.to_json(), fh)
        click.echo(f"{len(snap.critical_trajectories)} critical trajectories written to {out}")

    _run(run)


# ---------------------------------------------------------------- sweep


@main.command("sweep")
@curve_option
@params_option
@click.option("--steps", type=int, default=2000, show_default=True)
@click.option("--refine-tol", type=float, default=1e-10, show_default=True)
@json_flag
def cmd_sweep(cid, params, steps, refine_tol, as_json):
    """Degeneration phases matched with the BPS spectrum."""

    def run():
        from .bps import expected_spectrum, identify
        from .trajectories import detect_degenerations

        curve = build_curve(cid, parse_params(cid, params))
        structure = expected_spectrum(curve)
        events = detect_degenerations(curve, steps, refine_tol)
        rows = []
        for e in events:
            gamma = identify(curve, e, structure)
            e.matched_charge = gamma
            rows.append({"theta": e.theta_star, "kind": e.kind, "charge": gamma.as_dict(),
                         "label": gamma.label(), "Z": _json_complex(structure.Z(gamma)),
                         "omega": structure.omega_of(gamma), "length": e.length})
        if as_json:
            click.echo(json.dumps(rows, indent=2))
            return
        click.echo(f"{'theta':>10s}  {'kind':16s} {'omega':>5s}  {'Z':32s} charge")
        for r in rows:
            z = format_complex(complex(*r["Z"]))
            click.echo(f"{r['theta']:10.6f}  {r['kind']:16s} {r['omega']:5d}  {z:32s} {r['label']}")

    _run(run)


# ---------------------------------------------------------------- verify


@main.command("verify")
@click.option("--curve", "cid", default="all", show_default=True,
              type=click.Choice(("all",) + CURVE_IDS + DEGREE3_IDS))
@params_option
@click.option("--gmax", type=int, default=3, show_default=True)
@click.option("--tol", type=float, default=None, help="closed vs BPS relative tolerance")
@json_flag
def cmd_verify(cid, params, gmax, tol, as_json):
    """Check F_g(closed) = F_g(recursion) = F_g(BPS) and the degree-3 arithmetic."""

    def run():
        from .verify import Tolerances, degree3_check, verify_curve

        ids = list(CURVE_IDS + DEGREE3_IDS) if cid == "all" else [cid]
        tols = Tolerances(closed_vs_bps=tol) if tol is not None else Tolerances()
        reports = []
        for c in ids:
            if c in DEGREE3_IDS:
                m = parse_params(c, params) if cid != "all" else {}
                rep = degree3_check(c, m.get("minf", 1.0), m.get("t", 1.0), max(gmax, 2))
            else:
                m = parse_params(c, params) if cid != "all" else default_params(c)
                rep = verify_curve(c, m, gmax, tols)
            reports.append(rep)
        ok = all(r.passed for r in reports)
        if as_json:
            click.echo(json.dumps([r.to_json() for r in reports], indent=2))
        else:
            for r in reports:
                click.echo(f"{r.curve:5s} {'pass' if r.passed else 'FAIL'}")
        if not ok:
            sys.exit(1)

    _run(run)


if __name__ == "__main__":
    main()

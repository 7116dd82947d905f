"""Complex polynomials, rational functions, residues, Laurent coefficients
and path integrals.

Everything here is a pure function of its inputs. Polynomial coefficients are
stored in ascending order, so ``coeffs[k]`` multiplies ``z**k``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import IllConditioned, NumericFailure, UsageError

INF = complex(math.inf, 0.0)


def is_inf(z) -> bool:
    return cmath.isinf(complex(z))


@dataclass
class NumericConfig:
    """Tolerances shared by the numeric routines.

    ``dtype`` is the working precision knob of the series arithmetic in the
    recursion engine. The default ``np.clongdouble`` is 80-bit extended
    precision on x86-64 Linux, which keeps F_3 of the Gauss curve within
    1e-7 of the closed form; ``np.complex128`` is about five times faster.
    """

    dtype: type = np.clongdouble
    root_residual: float = 1e-10
    zero_tol: float = 1e-11
    contour_rel_tol: float = 1e-12
    contour_n_start: int = 64
    contour_n_cap: int = 4096
    path_abs_tol: float = 1e-10


CONFIG = NumericConfig()


# ---------------------------------------------------------------- series


def ser_mul(a: np.ndarray, b: np.ndarray, n: int | None = None) -> np.ndarray:
    """Product of two power series truncated to ``n`` terms."""
    n = min(len(a), len(b)) if n is None else n
    return np.convolve(a[:n], b[:n])[:n]


def ser_inv(a: np.ndarray, n: int | None = None) -> np.ndarray:
    """Reciprocal of a power series with ``a[0] != 0``."""
    n = len(a) if n is None else n
    a = np.concatenate([a, np.zeros(max(0, n - len(a)), dtype=a.dtype)])
    if a[0] == 0:
        raise IllConditioned("series inverse of a series with zero constant term")
    out = np.zeros(n, dtype=a.dtype)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1:k + 1], out[k - 1::-1]) / a[0]
    return out


def ser_div(a: np.ndarray, b: np.ndarray, n: int | None = None) -> np.ndarray:
    n = min(len(a), len(b)) if n is None else n
    return ser_mul(a, ser_inv(b, n), n)


def leading_zeros(c: np.ndarray, tol: float) -> int:
    """Number of leading coefficients that are zero relative to the largest."""
    scale = np.max(np.abs(c)) if len(c) else 0.0
    if scale == 0.0:
        return len(c)
    k = 0
    while k < len(c) and abs(c[k]) <= tol * scale:
        k += 1
    return k


# ---------------------------------------------------------------- Poly


class Poly:
    """Complex polynomial with ascending coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        k = len(c)
        while k > 1 and c[k - 1] == 0:
            k -= 1
        self.coeffs = c[:k] if k else np.zeros(1, dtype=complex)

    @classmethod
    def from_roots(cls, roots: Iterable[complex], lead: complex = 1.0) -> "Poly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly([0.0])
        return Poly(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[:len(self.coeffs)] += self.coeffs
        c[:len(other.coeffs)] += other.coeffs
        return Poly(c)

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        return Poly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def shifted(self, a: complex) -> np.ndarray:
        """Coefficients of ``t -> p(a + t)``."""
        c = self.coeffs.copy()
        n = len(c)
        for i in range(n - 1):
            for j in range(n - 2, i - 1, -1):
                c[j] += a * c[j + 1]
        return c

    def reversed(self, degree: int | None = None) -> "Poly":
        """Coefficients of ``u**d p(1/u)``."""
        d = self.degree if degree is None else degree
        c = np.zeros(d + 1, dtype=complex)
        c[d - self.degree:] = self.coeffs[::-1]
        return Poly(c)

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __repr__(self):
        return f"Poly({self.coeffs.tolist()})"


def _as_poly(p) -> Poly:
    return p if isinstance(p, Poly) else Poly([p])


def poly_roots(p: Poly) -> list[complex]:
    """All complex roots of ``p`` with multiplicity.

    Eigenvalues of the companion matrix, then one Newton step per simple
    root. Tight clusters of eigenvalues (a split multiple root) are
    replaced by their mean when that fits ``p`` better.
    """
    if p.degree < 1:
        raise UsageError("poly_roots needs degree >= 1")
    c = p.coeffs
    raw = [complex(r) for r in np.roots(c[::-1])]
    dp = p.derivative()
    polished = []
    for r in raw:
        d = dp(r)
        if d != 0:
            cand = r - p(r) / d
            if abs(p(cand)) <= abs(p(r)):
                r = cand
        polished.append(complex(r))
    polished = _merge_clusters(p, raw, polished)
    scale = p.scale()
    for r in polished:
        bound = CONFIG.root_residual * scale * max(1.0, abs(r)) ** p.degree
        if not np.isfinite(r) or abs(p(r)) > bound:
            raise NumericFailure(f"root {r} has residual {abs(p(r)):.3e} above {bound:.3e}")
    return polished


def _merge_clusters(p: Poly, raw: list[complex], polished: list[complex],
                    radius: float = 1e-3) -> list[complex]:
    """Eigenvalues of a k-fold root scatter by about eps**(1/k) around it,
    while their mean is accurate to rounding. A merge is kept only if the
    polynomial rebuilt from the roots gets closer to ``p``."""
    lead = p.coeffs[-1]

    def mismatch(rs):
        return float(np.max(np.abs(Poly.from_roots(rs, lead=lead).coeffs - p.coeffs)))

    groups: list[list[int]] = []
    for i, r in enumerate(raw):
        hits = [g for g in groups if any(abs(r - raw[j]) <= radius * max(1.0, abs(r)) for j in g)]
        merged = [i] + [j for g in hits for j in g]
        groups = [g for g in groups if g not in hits] + [merged]
    out = list(polished)
    for grp in groups:
        if len(grp) < 2:
            continue
        trial = list(out)
        mean = complex(np.mean([raw[j] for j in grp]))
        for j in grp:
            trial[j] = mean
        if mismatch(trial) < mismatch(out):
            out = trial
    return out


# ---------------------------------------------------------------- Mobius


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d)."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __call__(self, z):
        if np.isscalar(z) and is_inf(z):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if np.isscalar(z):
            if den == 0:
                return INF
            return (self.a * z + self.b) / den
        return (self.a * z + self.b) / den

    def derivative(self, z):
        det = self.a * self.d - self.b * self.c
        return det / (self.c * z + self.d) ** 2

    def compose(self, other: "Mobius") -> "Mobius":
        """self o other."""
        m = np.array([[self.a, self.b], [self.c, self.d]]) @ np.array(
            [[other.a, other.b], [other.c, other.d]])
        return Mobius(*m.ravel())

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def fixed_points(self) -> list[complex]:
        """Fixed points on the Riemann sphere (``INF`` for infinity)."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if c == 0:
            if a == d:
                return [INF]
            return [b / (d - a), INF]
        disc = cmath.sqrt((a - d) ** 2 + 4 * b * c)
        return [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]


# ---------------------------------------------------------------- RationalFn


@dataclass(frozen=True)
class LaurentCoeffs:
    center: complex
    min_order: int
    coeffs: np.ndarray

    def coeff(self, k: int) -> complex:
        i = k - self.min_order
        if i < 0:
            return 0j
        if i >= len(self.coeffs):
            raise IndexError(f"order {k} beyond computed range")
        return complex(self.coeffs[i])

    @property
    def max_order(self) -> int:
        return self.min_order + len(self.coeffs) - 1


class RationalFn:
    """Quotient of two polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1.0):
        num = num if isinstance(num, Poly) else Poly(num)
        den = den if isinstance(den, Poly) else Poly(den)
        if den.is_zero():
            raise UsageError("denominator is identically zero")
        self.num = num
        self.den = den

    def __call__(self, z):
        return self.num(z) / self.den(z)

    def derivative(self) -> "RationalFn":
        n, d = self.num, self.den
        return RationalFn(n.derivative() * d - n * d.derivative(), d * d)

    def __mul__(self, other):
        other = _as_rational(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rational(other)
        return RationalFn(self.num * other.den, self.den * other.num)

    def __add__(self, other):
        other = _as_rational(other)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_rational(other))

    def compose_mobius(self, m: Mobius) -> "RationalFn":
        """The function ``u -> self(m(u))``."""
        lin_n = Poly([m.b, m.a])
        lin_d = Poly([m.d, m.c])

        def hom(p: Poly, deg: int) -> Poly:
            out = Poly([0.0])
            for k, ck in enumerate(p.coeffs):
                out = out + ck * (lin_n ** k) * (lin_d ** (deg - k))
            return out

        dn, dd = self.num.degree, self.den.degree
        deg = max(dn, dd)
        return RationalFn(hom(self.num, deg), hom(self.den, deg))

    def laurent(self, p: complex, n_terms: int, tol: float | None = None,
                cancel: bool = False) -> LaurentCoeffs:
        """Exact Laurent coefficients at a finite point ``p``.

        Leading shifted coefficients that are tiny relative to the rest are
        treated as exact zeros, which fixes the valuation when ``p`` is only
        known to rounding accuracy. A common zero of numerator and
        denominator is an error unless ``cancel`` is set.
        """
        tol = CONFIG.zero_tol if tol is None else tol
        n_sh = self.num.shifted(p)
        d_sh = self.den.shifted(p)
        vn = leading_zeros(n_sh, tol)
        vd = leading_zeros(d_sh, tol)
        if vd == len(d_sh):
            raise IllConditioned("denominator vanishes identically")
        if vn == len(n_sh):
            return LaurentCoeffs(p, 0, np.zeros(n_terms, dtype=complex))
        if vn > 0 and vd > 0 and not cancel:
            raise IllConditioned(f"numerator and denominator both vanish at {p}")
        a = np.concatenate([n_sh[vn:], np.zeros(n_terms, dtype=complex)])[:n_terms]
        b = np.concatenate([d_sh[vd:], np.zeros(n_terms, dtype=complex)])[:n_terms]
        return LaurentCoeffs(p, vn - vd, ser_div(a, b, n_terms))

    def at_infinity(self) -> "RationalFn":
        """The function ``u -> self(1/u)``."""
        dn, dd = self.num.degree, self.den.degree
        d = max(dn, dd)
        return RationalFn(self.num.reversed(d), self.den.reversed(d))

    def __repr__(self):
        return f"RationalFn({self.num!r}, {self.den!r})"


def _as_rational(f) -> RationalFn:
    if isinstance(f, RationalFn):
        return f
    return RationalFn(f, 1.0)


def residue_at(f: RationalFn, p, cancel: bool = False) -> complex:
    """Coefficient of ``(z-p)**-1`` of ``f``; ``p`` may be ``INF``.

    At infinity this is the residue of the 1-form ``f dz``.
    """
    if is_inf(p):
        return residue_at_infinity(f, cancel)
    lc = f.laurent(complex(p), 1, cancel=cancel)
    if lc.min_order > -1:
        return 0j
    lc = f.laurent(complex(p), -lc.min_order, cancel=cancel)
    return lc.coeff(-1)


def residue_at_infinity(f: RationalFn, cancel: bool = False) -> complex:
    """Residue of ``f(z) dz`` at ``z = inf`` (minus the 1/z coefficient)."""
    # f(1/u) d(1/u) = -u^(dD - dN - 2) Nrev(u) / Drev(u) du
    shift = f.den.degree - f.num.degree - 2
    num = -f.num.reversed().coeffs
    den = f.den.reversed().coeffs
    if shift >= 0:
        num = np.concatenate([np.zeros(shift, dtype=complex), num])
    else:
        den = np.concatenate([np.zeros(-shift, dtype=complex), den])
    return residue_at(RationalFn(num, den), 0.0, cancel=cancel)


# ---------------------------------------------------------------- quadrature


def _vectorized(f: Callable) -> Callable:
    def g(z):
        try:
            out = np.asarray(f(z), dtype=complex)
            if out.shape == np.shape(z):
                return out
        except (TypeError, ValueError):
            pass
        return np.array([complex(f(zi)) for zi in np.ravel(z)]).reshape(np.shape(z))
    return g


def contour_coeffs(f: Callable, center: complex, orders: Sequence[int] | range,
                   radius: float | None = None, singularities: Iterable[complex] = (),
                   rel_tol: float | None = None, n_start: int | None = None,
                   n_cap: int | None = None) -> LaurentCoeffs:
    """Laurent coefficients of ``f`` about ``center`` by the trapezoid rule
    on a circle, doubling the node count until two estimates agree."""
    rel_tol = CONFIG.contour_rel_tol if rel_tol is None else rel_tol
    n = CONFIG.contour_n_start if n_start is None else n_start
    n_cap = CONFIG.contour_n_cap if n_cap is None else n_cap
    orders = list(orders)
    lo, hi = min(orders), max(orders)
    center = complex(center)
    if radius is None:
        dists = [abs(s - center) for s in singularities if not is_inf(s) and abs(s - center) > 0]
        radius = 0.25 * min(dists) if dists else 0.25
    fv = _vectorized(f)
    ks = np.arange(lo, hi + 1)

    def estimate(m):
        theta = 2 * np.pi * np.arange(m) / m
        w = radius * np.exp(1j * theta)
        vals = fv(center + w)
        coeffs = np.array([np.mean(vals * w ** (-k)) for k in ks])
        return coeffs, float(np.max(np.abs(vals)))

    prev, _ = estimate(n)
    while True:
        n2 = 2 * n
        if n2 > n_cap:
            raise NumericFailure(
                f"contour_coeffs did not converge at N={n}: last estimates {prev.tolist()}")
        cur, fmax = estimate(n2)
        diff = np.max(np.abs(cur - prev) * radius ** ks.astype(float))
        if diff <= rel_tol * max(fmax, 1e-300):
            return LaurentCoeffs(center, lo, cur)
        prev, n = cur, n2


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(order: int):
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = ((x + 1) / 2, w / 2)
    return _GL_CACHE[order]


class _SqrtBranch:
    """Square root of ``Q`` continued along one segment."""

    def __init__(self, Q, p0, p1, reference: complex, samples: int = 256):
        self.p0, self.p1 = p0, p1
        while True:
            tau = np.linspace(0.0, 1.0, samples + 1)
            raw = np.sqrt(np.asarray(Q(p0 + tau * (p1 - p0)), dtype=complex))
            ref = reference
            vals = np.empty_like(raw)
            ok = True
            prev_phase = None
            for i, r in enumerate(raw):
                if abs(r) == 0:
                    vals[i] = ref
                    continue
                if (r * np.conj(ref)).real < 0:
                    r = -r
                if prev_phase is not None and abs(cmath.phase(r / prev_phase)) > 1.0:
                    ok = False
                prev_phase = r
                vals[i] = r
                ref = r
            if ok or samples >= 1 << 16:
                break
            samples *= 4
        self.tau = tau
        self.ref = vals
        self.end_reference = ref
        self.Q = Q

    def __call__(self, tau):
        idx = np.clip(np.rint(tau * (len(self.tau) - 1)).astype(int), 0, len(self.tau) - 1)
        raw = np.sqrt(np.asarray(self.Q(self.p0 + tau * (self.p1 - self.p0)), dtype=complex))
        flip = (raw * np.conj(self.ref[idx])).real < 0
        return np.where(flip, -raw, raw)


def path_integral(f: Callable | None, path: Sequence[complex], order: int = 20,
                  abs_tol: float | None = None, poles: Iterable[complex] = (),
                  exclusion: float = 1e-9, sqrt_of: Callable | None = None,
                  branch: complex = 1.0, max_depth: int = 60) -> complex:
    """Integral of ``f(x) dx`` along a polyline.

    With ``sqrt_of=Q`` the integrand is ``f(x) * sqrt(Q(x))`` (``f`` may be
    None) where the square root is continued along the path, starting on the
    sheet whose value has positive projection on ``branch``.
    """
    abs_tol = CONFIG.path_abs_tol if abs_tol is None else abs_tol
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise UsageError("path needs at least two points")
    for q in poles:
        if is_inf(q):
            continue
        for a, b in zip(pts[:-1], pts[1:]):
            if _segment_distance(q, a, b) < exclusion:
                raise UsageError(f"path passes within {exclusion} of the pole {q}")
    fv = _vectorized(f) if f is not None else (lambda z: np.ones_like(z, dtype=complex))
    nodes, weights = _gauss_legendre(order)
    n_seg = len(pts) - 1
    total = 0j
    ref = complex(branch) if branch != 0 else 1.0
    for a, b in zip(pts[:-1], pts[1:]):
        if a == b:
            continue
        if sqrt_of is not None:
            br = _SqrtBranch(sqrt_of, a, b, ref)
            ref = br.end_reference

            def g(tau, br=br, a=a, b=b):
                return fv(a + tau * (b - a)) * br(tau) * (b - a)
        else:
            def g(tau, a=a, b=b):
                return fv(a + tau * (b - a)) * (b - a)
        total += _adaptive_gl(g, 0.0, 1.0, nodes, weights, abs_tol / n_seg, max_depth)
    return total


def _segment_distance(q, a, b) -> float:
    d = b - a
    if d == 0:
        return abs(q - a)
    t = ((q - a) * np.conj(d)).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(q - (a + t * d))


def _adaptive_gl(g, lo, hi, nodes, weights, tol, max_depth):
    def rule(a, b):
        return (b - a) * np.sum(weights * g(a + (b - a) * nodes))

    total = 0j
    stack = [(lo, hi, rule(lo, hi), tol, 0)]
    while stack:
        a, b, whole, t, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = rule(a, m), rule(m, b)
        if abs(left + right - whole) <= t:
            total += left + right
            continue
        if depth >= max_depth:
            raise NumericFailure(f"path_integral: no convergence on [{a}, {b}]")
        stack.append((a, m, left, t / 2, depth + 1))
        stack.append((m, b, right, t / 2, depth + 1))
    return total

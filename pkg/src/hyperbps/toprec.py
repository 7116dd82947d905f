"""Eynard-Orantin topological recursion on catalog curves.

Correlators are held as coefficient tensors over the basis

    phi_{a,j}(z) = (z - a)**-(j+1),   a a ramification point, j >= 1,

which spans the residue-free differentials with poles only at ramification
points. Each residue of the recursion is taken exactly on truncated Laurent
series in the local coordinate ``t = z - a``, so no quadrature error enters
the free energies. A nested contour-quadrature evaluator is kept alongside as
an independent check of the pointwise values.

When a ramification point sits at ``z = inf`` everything is pulled back along
``z = q + 1/u``. The Bergman kernel is Mobius invariant, so the recursion in
the ``u`` chart is the same recursion.
"""

from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .curves import CurveData, POLE_MASS
from .errors import NumericFailure, SingularKernel, UsageError
from .numeric import CONFIG, INF, Mobius, RationalFn, contour_coeffs, is_inf, ser_div, ser_inv, ser_mul

# ---------------------------------------------------------------- Bernoulli


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """B_n with B_1 = -1/2, from sum_{k<=n} C(n+1, k) B_k = 0."""
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for k in range(n):
        total += math.comb(n + 1, k) * bernoulli(k)
    return -total / (n + 1)


def bernoulli_weight(g: int) -> float:
    """B_{2g} / (2g (2g-2))."""
    return float(bernoulli(2 * g) / (2 * g * (2 * g - 2)))


# ---------------------------------------------------------------- kernels


def bergman(z1, z2):
    """Coefficient of dz1 dz2 in B(z1, z2)."""
    if np.isscalar(z1) and np.isscalar(z2) and z1 == z2:
        raise UsageError("bergman kernel at coincident points")
    return 1.0 / (z1 - z2) ** 2


def recursion_kernel(curve: CurveData, r, z0, z):
    """Coefficient of dz0 / dz in K_r(z0, z).

    The integral of B(z0, .) from sigma(z) to z is 1/(z0-z) - 1/(z0-sigma(z)).
    """
    sig = curve.involution
    zb = sig(z)
    dy = curve.y_of_z(z) - curve.y_of_z(zb)
    if np.any(np.abs(dy) == 0):
        raise SingularKernel(f"kernel evaluated on the fixed locus of the involution at {z}")
    xp = curve.x_of_z.derivative()(z)
    return (1.0 / (z0 - z) - 1.0 / (z0 - zb)) / (2.0 * dy * xp)


# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class FreeEnergyValue:
    g: int
    value: complex
    method: str
    error_estimate: float = 0.0
    modulo: str | None = None


# ---------------------------------------------------------------- series window


class _Window:
    """Laurent series stored on the fixed order window [lo, hi] (axis 0)."""

    def __init__(self, lo: int, hi: int, dtype):
        self.lo, self.hi, self.dtype = lo, hi, dtype
        self.L = hi - lo + 1

    def zeros(self, *shape):
        return np.zeros((self.L,) + shape, dtype=self.dtype)

    def from_laurent(self, v: int, coeffs) -> np.ndarray:
        out = self.zeros()
        for k, c in enumerate(coeffs):
            o = v + k
            if self.lo <= o <= self.hi:
                out[o - self.lo] = c
        return out

    def mul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Cauchy product, outer over the trailing axes."""
        lo, L = self.lo, self.L
        out = np.zeros((L,) + A.shape[1:] + B.shape[1:], dtype=self.dtype)
        rows_b = np.nonzero(np.any(B.reshape(L, -1) != 0, axis=1))[0]
        if len(rows_b) == 0:
            return out
        b0, b1 = rows_b[0], rows_b[-1] + 1
        na = A.ndim - 1
        for i1 in np.nonzero(np.any(A.reshape(L, -1) != 0, axis=1))[0]:
            off = i1 + lo
            j0, j1 = max(b0, -off), min(b1, L - off)
            if j0 >= j1:
                continue
            block = np.multiply.outer(A[i1], B[j0:j1])
            out[off + j0:off + j1] += np.moveaxis(block, na, 0)
        return out

    def mul_contract(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Cauchy product summing A's axis 1 against B's axis 1."""
        lo, L = self.lo, self.L
        out = np.zeros((L,) + A.shape[2:], dtype=self.dtype)
        for i1 in np.nonzero(np.any(A.reshape(L, -1) != 0, axis=1))[0]:
            off = i1 + lo
            j0, j1 = max(0, -off), min(L, L - off)
            if j0 >= j1:
                continue
            out[off + j0:off + j1] += np.tensordot(B[j0:j1], A[i1], axes=([1], [0]))
        return out


def _taylor_series(f: RationalFn, a: complex, n: int, dtype, dps: int = 40) -> tuple[int, np.ndarray]:
    """Laurent coefficients of ``f`` at ``a`` (valuation, coefficients).

    The Taylor shift and the series division run in mpmath: both lose
    digits in double precision, and the residue sums of the recursion
    amplify those errors by many orders of magnitude at higher genus.
    """
    with mpmath.workdps(dps):
        am = mpmath.mpc(a)

        def shifted(coeffs):
            c = [mpmath.mpc(complex(x)) for x in coeffs]
            for i in range(len(c) - 1):
                for j in range(len(c) - 2, i - 1, -1):
                    c[j] += am * c[j + 1]
            return c

        def valuation(c):
            scale = max(abs(x) for x in c)
            v = 0
            while v < len(c) and abs(c[v]) <= CONFIG.zero_tol * scale:
                v += 1
            return v

        ns, ds = shifted(f.num.coeffs), shifted(f.den.coeffs)
        vn, vd = valuation(ns), valuation(ds)
        A = (ns[vn:] + [0] * n)[:n]
        B = (ds[vd:] + [0] * n)[:n]
        out = []
        for k in range(n):
            out.append((A[k] - mpmath.fsum(out[j] * B[k - j] for j in range(k))) / B[0])
        if np.dtype(dtype) == np.dtype(np.clongdouble) and np.finfo(np.longdouble).eps < 1e-17:
            # keep the digits below double precision
            coeffs = np.array([np.longdouble(mpmath.nstr(x.real, 25)) for x in out], dtype=dtype)
            coeffs += 1j * np.array([np.longdouble(mpmath.nstr(x.imag, 25)) for x in out], dtype=dtype)
        else:
            coeffs = np.array([complex(x) for x in out], dtype=dtype)
    return vn - vd, coeffs


def _power_series_pow(s: np.ndarray, k: int, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=s.dtype)
    out[0] = 1.0
    for _ in range(k):
        out = ser_mul(out, s, n)
    return out


# ---------------------------------------------------------------- session


class CorrelatorSession:
    """Correlators W_{g,n} of one curve, memoized.

    ``g_max`` and ``n_max`` fix the size of the local basis: any W_{g,n} with
    ``6g + 2n <= 6 g_max + 2 n_max`` can be requested.
    """

    def __init__(self, curve: CurveData, g_max: int = 3, n_max: int = 1, quad_nodes: int = 64,
                 quad_radius_factor: float = 0.2, dtype=None):
        self.curve = curve
        self.g_max = g_max
        self.n_max = n_max
        self.dtype = CONFIG.dtype if dtype is None else dtype
        self.quad_nodes = quad_nodes
        self.quad_radius_factor = quad_radius_factor
        self._lock = threading.RLock()
        self._tensors: dict = {}
        self._expansions: dict = {}
        self._quad_cache: dict = {}
        self._setup_chart()
        self._setup_series()

    # -- chart ------------------------------------------------------------

    def _setup_chart(self):
        c = self.curve
        ram = list(c.ramification_z)
        if any(is_inf(r) for r in ram):
            finite = [r for r in ram if not is_inf(r)]
            spread = max([1.0] + [abs(r) for r in finite])
            q = complex(0.8 + 0.55j) * spread
            while any(abs(q - r) < 0.3 * spread for r in finite):
                q *= 1.37
            chart = Mobius(q, 1.0, 1.0, 0.0)  # z = q + 1/u
        else:
            chart = Mobius(1.0, 0.0, 0.0, 1.0)
        self.chart = chart
        self.chart_inv = chart.inverse()
        self.x = c.x_of_z.compose_mobius(chart)
        self.y = c.y_of_z.compose_mobius(chart)
        self.xp = self.x.derivative()
        self.ydx = self.y * self.xp
        self.sigma = self.chart_inv.compose(c.involution).compose(chart)
        self.ram = [complex(self.chart_inv(r)) for r in ram]
        for a in self.ram:
            if is_inf(a):
                raise NumericFailure("chart change left a ramification point at infinity")

    # -- local data -------------------------------------------------------

    def _setup_series(self):
        J = max(3, 6 * self.g_max + 2 * self.n_max - 5)
        self.J = J
        self.nb = len(self.ram) * J
        lo = -2 * (J + 1) - 4
        hi = 2 * J + 6
        w = self.win = _Window(lo, hi, self.dtype)
        n = hi + 1  # power-series length for orders 0..hi
        self._local = []
        for ai, a in enumerate(self.ram):
            sig = self.sigma
            # s(t) = sigma(a + t) - a as a power series
            num = np.array([sig.a * a + sig.b, sig.a], dtype=complex)
            den = np.array([sig.c * a + sig.d, sig.c], dtype=complex)
            num = np.concatenate([num, np.zeros(n)])[:n]
            den = np.concatenate([den, np.zeros(n)])[:n]
            s = ser_div(num, den, n)
            s[0] -= a
            if abs(s[0]) > 1e-9 * max(1.0, abs(a)):
                raise NumericFailure(f"ramification point {a} is not fixed by the involution")
            s[0] = 0.0
            s = s.astype(self.dtype)
            s1 = s[1:].copy()  # s = t * s1
            inv_s1 = ser_inv(s1, n)
            dsig = np.array([(k + 1) * s[k + 1] for k in range(n - 1)] + [0], dtype=self.dtype)

            # P(t) = sigma'(a+t) / (4 y x'), a Laurent series
            v_w, c_w = _taylor_series(self.ydx, a, n + 4, self.dtype)
            inv_w = ser_inv(c_w, n + 4)
            P = w.from_laurent(-v_w, 0.25 * ser_mul(dsig, inv_w, n))

            # T_j(t) = t^j - s^j
            T = np.zeros((J + 1, w.L), dtype=self.dtype)
            sp = np.zeros(n, dtype=self.dtype)
            sp[0] = 1.0
            for j in range(1, J + 1):
                sp = ser_mul(sp, s, n)
                tj = -sp.copy()
                tj[j] += 1.0
                T[j] = w.from_laurent(0, tj)

            # expansions of the basis at a + t and at a + s(t)
            Et = w.zeros(self.nb)
            Es = w.zeros(self.nb)
            for bi, b in enumerate(self.ram):
                for j in range(1, J + 1):
                    col = bi * J + (j - 1)
                    if bi == ai:
                        Et[-(j + 1) - w.lo, col] = 1.0
                        Es[:, col] = w.from_laurent(-(j + 1), _power_series_pow(inv_s1, j + 1, n))
                    else:
                        d = a - b
                        # (d + t)^-(j+1) and (d + s)^-(j+1)
                        base = np.array([
                            math.comb(j + k, k) * (-1) ** k * d ** (-(j + 1) - k) for k in range(n)
                        ], dtype=self.dtype)
                        Et[:, col] = w.from_laurent(0, base)
                        comp = np.zeros(n, dtype=self.dtype)
                        sk = np.zeros(n, dtype=self.dtype)
                        sk[0] = 1.0
                        for k in range(n):
                            comp += base[k] * sk
                            sk = ser_mul(sk, s, n)
                            if not np.any(sk):
                                break
                        Es[:, col] = w.from_laurent(0, comp)

            # B(a+t, w) and B(a+s, w) against the basis in w
            Bt = w.zeros(self.nb)
            Bs = w.zeros(self.nb)
            sk = np.zeros(n, dtype=self.dtype)
            sk[0] = 1.0
            for k in range(J):
                col = ai * J + k  # phi_{a,k+1}
                Bt[k - w.lo, col] = k + 1
                Bs[:, col] = w.from_laurent(0, (k + 1) * sk)
                sk = ser_mul(sk, s, n)
            # B(a+t, a+s) = 1/(t - s)^2 = t^-2 (1 - s1)^-2
            one_minus = -s1.copy()
            one_minus[0] += 1.0
            inv = ser_inv(one_minus, n)
            Bts = w.from_laurent(-2, ser_mul(inv, inv, n))

            # Taylor coefficients of Phi: Phi_j = [t^{j-1}](y x')(a+t) / j
            if v_w < 0:
                raise NumericFailure("y dx has a pole at a ramification point")
            ydx_ser = np.zeros(n, dtype=self.dtype)
            ydx_ser[v_w:] = c_w[:n - v_w]
            phi = np.zeros(J + 1, dtype=self.dtype)
            for j in range(1, J + 1):
                phi[j] = ydx_ser[j - 1] / j

            self._local.append(dict(a=a, s=s, P=P, T=T, Et=Et, Es=Es, Bt=Bt, Bs=Bs,
                                    Bts=Bts, phi=phi, ydx_val=v_w))

    # -- tensors ----------------------------------------------------------

    def _check_size(self, g, n):
        if 6 * g + 2 * n - 5 > self.J:
            raise UsageError(f"W_{{{g},{n}}} needs a larger basis; raise g_max or n_max")

    def tensor(self, g: int, n: int) -> np.ndarray:
        """Coefficients of W_{g,n} over the basis (one axis per variable)."""
        if 2 * g - 2 + n <= 0:
            raise UsageError("W_{0,1} and W_{0,2} are not in the basis")
        self._check_size(g, n)
        key = (g, n)
        with self._lock:
            if key not in self._tensors:
                self._tensors[key] = self._compute(g, n)
            return self._tensors[key]

    def _expansion(self, ai: int, g: int, m: int, side: str) -> np.ndarray:
        """Series of W_{g,m}(a+t, w_1..w_{m-1}) or at a+s(t)."""
        key = (ai, g, m, side)
        if key in self._expansions:
            return self._expansions[key]
        loc = self._local[ai]
        if (g, m) == (0, 2):
            out = loc["Bt"] if side == "t" else loc["Bs"]
        else:
            E = loc["Et"] if side == "t" else loc["Es"]
            out = np.tensordot(E, self.tensor(g, m), axes=([1], [0]))
        self._expansions[key] = out
        return out

    def _compute(self, g: int, n1: int) -> np.ndarray:
        n = n1 - 1
        w = self.win
        nb, J = self.nb, self.J
        out = np.zeros((nb,) * n1, dtype=self.dtype)
        for ai, loc in enumerate(self._local):
            br = w.zeros(*((nb,) * n))
            if g >= 1:
                if n == 0 and g == 1:
                    br = br + loc["Bts"]
                else:
                    C = self.tensor(g - 1, n + 2)
                    A = np.tensordot(loc["Et"], C, axes=([1], [0]))
                    br = br + w.mul_contract(A, loc["Es"])
            for g1 in range(g + 1):
                g2 = g - g1
                for r in range(n + 1):
                    for I1 in itertools.combinations(range(n), r):
                        I2 = tuple(i for i in range(n) if i not in I1)
                        if (g1, len(I1)) == (0, 0) or (g2, len(I2)) == (0, 0):
                            continue
                        F1 = self._expansion(ai, g1, len(I1) + 1, "t")
                        F2 = self._expansion(ai, g2, len(I2) + 1, "s")
                        prod = w.mul(F1, F2)
                        order = I1 + I2
                        perm = [0] + [1 + order.index(i) for i in range(n)]
                        br = br + np.transpose(prod, perm)
            G = w.mul(loc["P"], br)
            # coefficient of phi_{a,j}(z0): sum_q T_j[q] G[-1-q]
            qs = np.arange(1, -w.lo)
            g_rows = G[(-1 - qs) - w.lo]
            t_cols = loc["T"][:, qs - w.lo]
            coeff = np.tensordot(t_cols, g_rows, axes=([1], [0]))
            out[ai * J:(ai + 1) * J] += coeff[1:]
        return out

    # -- pointwise values -------------------------------------------------

    def basis_values(self, u) -> np.ndarray:
        u = complex(u)
        vals = np.empty(self.nb, dtype=complex)
        for ai, a in enumerate(self.ram):
            d = u - a
            vals[ai * self.J:(ai + 1) * self.J] = d ** -np.arange(2, self.J + 2)
        return vals

    def _to_chart(self, z):
        """Chart coordinate u of z and du/dz."""
        u = complex(self.chart_inv(complex(z)))
        return u, complex(self.chart_inv.derivative(complex(z)))

    def eval(self, g: int, n: int, points) -> complex:
        """W_{g,n} at points of the original z-plane (coefficient of dz_1...dz_n)."""
        points = tuple(complex(p) for p in points)
        if len(points) != n:
            raise UsageError(f"W_{{{g},{n}}} takes {n} points")
        if g < 0:
            return 0j
        if (g, n) == (0, 1):
            z = points[0]
            return complex(self.curve.y_of_z(z) * self.curve.x_of_z.derivative()(z))
        if (g, n) == (0, 2):
            return complex(bergman(points[0], points[1]))
        C = self.tensor(g, n)
        jac = 1.0 + 0j
        out = C
        for z in points:
            u, du = self._to_chart(z)
            jac *= du
            out = np.tensordot(self.basis_values(u), out, axes=([0], [0]))
        return complex(out) * jac

    # -- free energy ------------------------------------------------------

    def free_energy(self, g: int) -> complex:
        if g < 2:
            raise UsageError("the recursion defines F_g through W_{g,1} only for g >= 2")
        C = self.tensor(g, 1)
        total = 0j
        for ai, loc in enumerate(self._local):
            total += np.dot(C[ai * self.J:(ai + 1) * self.J], loc["phi"][1:])
        return complex(total) / (2 - 2 * g)

    def laurent_tensor(self, g: int, ai: int) -> np.ndarray:
        """Exact polar coefficients of W_{g,1} at ramification point ``ai``,
        indexed by pole order 2..J+1 (chart coordinate)."""
        C = self.tensor(g, 1)
        return C[ai * self.J:(ai + 1) * self.J]

    # -- quadrature oracle -----------------------------------------------

    def quad_radius(self, ai: int) -> float:
        a = self.ram[ai]
        others = [r for j, r in enumerate(self.ram) if j != ai]
        for pz in self.curve.punctures:
            if not is_inf(pz.z):
                others.append(complex(self.chart_inv(pz.z)))
        for root in _rational_singularities(self.ydx):
            others.append(root)
        d = [abs(o - a) for o in others if abs(o - a) > 1e-12]
        return self.quad_radius_factor * (min(d) if d else 1.0)

    def eval_quadrature(self, g: int, n: int, points, nodes: int | None = None) -> complex:
        """W_{g,n} by nested contour residues (independent of the tensors)."""
        nodes = self.quad_nodes if nodes is None else nodes
        us = []
        jac = 1.0 + 0j
        for z in points:
            u, du = self._to_chart(z)
            us.append(u)
            jac *= du
        return self._quad(g, n, tuple(us), 0, nodes) * jac

    def _quad(self, g, n, us, depth, nodes):
        if g < 0:
            return 0j
        if (g, n) == (0, 1):
            return complex(self.ydx(us[0]))
        if (g, n) == (0, 2):
            return complex(bergman(us[0], us[1]))
        key = (g, n, us, depth, nodes)
        if key in self._quad_cache:
            return self._quad_cache[key]
        z0, rest = us[0], us[1:]
        m = len(rest)
        theta = 2 * np.pi * np.arange(nodes) / nodes
        total = 0j
        for ai, a in enumerate(self.ram):
            rho = self.quad_radius(ai) * 0.5 ** depth
            for th in theta:
                dz = rho * np.exp(1j * th)
                z = a + dz
                zb = self.sigma(z)
                dsig = self.sigma.derivative(z)
                kern = (1.0 / (z0 - z) - 1.0 / (z0 - zb)) / (4.0 * self.ydx(z))
                br = self._quad(g - 1, m + 2, (z, zb) + rest, depth + 1, nodes)
                for g1 in range(g + 1):
                    g2 = g - g1
                    for r in range(m + 1):
                        for I1 in itertools.combinations(range(m), r):
                            I2 = tuple(i for i in range(m) if i not in I1)
                            if (g1, len(I1)) == (0, 0) or (g2, len(I2)) == (0, 0):
                                continue
                            w1 = self._quad(g1, len(I1) + 1, (z,) + tuple(rest[i] for i in I1),
                                            depth + 1, nodes)
                            w2 = self._quad(g2, len(I2) + 1, (zb,) + tuple(rest[i] for i in I2),
                                            depth + 1, nodes)
                            br += w1 * w2
                total += kern * dsig * br * dz
        val = total / nodes
        self._quad_cache[key] = val
        return val


def _rational_singularities(f: RationalFn) -> list[complex]:
    if f.den.degree < 1:
        return []
    return list(np.roots(f.den.coeffs[::-1]))


# ---------------------------------------------------------------- public API


def eval_W(session: CorrelatorSession, g: int, n: int, points, method: str = "tensor") -> complex:
    if method == "tensor":
        return session.eval(g, n, points)
    if method == "quadrature":
        return session.eval_quadrature(g, n, points)
    raise UsageError(f"unknown method {method!r}")


def free_energy_recursion(session: CorrelatorSession, g: int, method: str = "tensor") -> FreeEnergyValue:
    """F_g = (1/(2-2g)) sum_r Res_r Phi W_{g,1}.

    ``method="tensor"`` reads the polar coefficients off the exact local
    expansion. ``method="contour"`` extracts them from pointwise values of
    W_{g,1} with :func:`contour_coeffs` and checks that the residue vanishes.
    """
    if g < 2:
        raise UsageError("free_energy_recursion needs g >= 2")
    exact = session.free_energy(g)
    if method == "tensor":
        return FreeEnergyValue(g, exact, "recursion", 0.0)
    if method != "contour":
        raise UsageError(f"unknown method {method!r}")
    total = 0j
    kmax = 6 * g - 2
    C = session.tensor(g, 1)
    for ai, loc in enumerate(session._local):
        a = loc["a"]
        coeffs = C[ai * session.J:(ai + 1) * session.J]

        def w(u, coeffs=coeffs, a=a):
            u = np.asarray(u, dtype=complex)
            d = u - a
            return sum(coeffs[j] * d ** -(j + 2) for j in range(len(coeffs)))

        rho = session.quad_radius(ai)
        lc = contour_coeffs(w, a, range(-kmax, 0), radius=rho, rel_tol=1e-10)
        scale = max(abs(lc.coeff(-k)) * rho ** -k for k in range(1, kmax + 1))
        if abs(lc.coeff(-1)) * rho ** -1 > 1e-6 * max(scale, 1e-300):
            raise NumericFailure(f"W_{{{g},1}} has a residue {lc.coeff(-1)} at a ramification point")
        for k in range(1, kmax):
            if k < len(loc["phi"]):
                total += loc["phi"][k] * lc.coeff(-k - 1)
    value = total / (2 - 2 * g)
    return FreeEnergyValue(g, complex(value), "recursion", float(abs(value - exact)))


# ---------------------------------------------------------------- closed forms


def _signed_masses(cid: str, m: dict):
    """(weight, a) pairs with F_g = B_{2g}/(2g(2g-2)) sum weight * a^(2-2g)."""
    if cid == "HG":
        m0, m1, mi = m["m0"], m["m1"], m["minf"]
        out = [(1, m0 + e1 * m1 + e2 * mi) for e1 in (1, -1) for e2 in (1, -1)]
        out += [(-1, 2 * m[s]) for s in ("m0", "m1", "minf")]
        return out
    if cid == "dHG":
        m1, mi = m["m1"], m["minf"]
        return [(2, m1 + mi), (2, m1 - mi), (-1, 2 * m1), (-1, 2 * mi)]
    if cid == "Kum":
        m0, mi = m["m0"], m["minf"]
        return [(1, m0 + mi), (1, m0 - mi), (-1, 2 * m0)]
    if cid == "Leg":
        return [(4, m["minf"]), (-1, 2 * m["minf"])]
    if cid == "Bes":
        return [(-1, 2 * m["m0"])]
    if cid == "Whi":
        return [(2, m["minf"])]
    if cid == "Web":
        return [(1, m["minf"])]
    if cid in ("Ai", "dBes"):
        return []
    raise UsageError(f"no closed form for {cid}")


def closed_form_terms(cid: str, m: dict) -> list[tuple[int, complex]]:
    """The (multiplicity, mass combination) pairs of the closed forms."""
    return [(w, complex(a)) for w, a in _signed_masses(cid, {k: complex(v) for k, v in m.items()})]


def free_energy_closed(cid: str, m: dict, g: int, modulo_ambiguity: bool = False) -> FreeEnergyValue:
    """Closed-form F_g.

    For g = 0 the value is defined modulo quadratic polynomials in the
    masses and for g = 1 modulo constants; those require
    ``modulo_ambiguity=True``. The g = 1 value is written as a sum of
    logarithms, one representative of the logarithm of the product.
    """
    from .curves import _check_names, _violations
    from .errors import InvalidParameters

    m = _check_names(cid, dict(m))
    bad = _violations(cid, m)
    if bad:
        raise InvalidParameters(f"{cid}: " + "; ".join(bad))
    terms = _signed_masses(cid, m)
    if g < 0:
        raise UsageError("g must be >= 0")
    if g in (0, 1) and not modulo_ambiguity:
        raise UsageError(f"F_{g} is only defined up to an ambiguity; pass modulo_ambiguity=True")
    if g == 0:
        val = _f0_closed(cid, m)
        return FreeEnergyValue(0, val, "closed_form", 0.0, "quadratic polynomials")
    if g == 1:
        val = _f1_closed(cid, m)
        return FreeEnergyValue(1, val, "closed_form", 0.0, "additive constants")
    c = bernoulli_weight(g)
    val = c * sum(wt * a ** (2 - 2 * g) for wt, a in terms)
    return FreeEnergyValue(g, complex(val), "closed_form", 0.0)


def _xlogx(a):
    return a * a / 2 * np.log(a)


def _f0_closed(cid, m):
    if cid == "HG":
        m0, m1, mi = m["m0"], m["m1"], m["minf"]
        s = sum(_xlogx(m0 + e1 * m1 + e2 * mi) for e1 in (1, -1) for e2 in (1, -1))
        return complex(s - sum(_xlogx(2 * m[k]) for k in ("m0", "m1", "minf")))
    if cid == "dHG":
        m1, mi = m["m1"], m["minf"]
        s = sum((m1 + e * mi) ** 2 * np.log(m1 + e * mi) for e in (1, -1))
        return complex(s - _xlogx(2 * m1) - _xlogx(2 * mi))
    if cid == "Kum":
        m0, mi = m["m0"], m["minf"]
        return complex(_xlogx(m0 + mi) + _xlogx(m0 - mi) - _xlogx(2 * m0))
    if cid == "Leg":
        mi = m["minf"]
        return complex(2 * mi**2 * np.log(mi) - _xlogx(2 * mi))
    if cid == "Bes":
        return complex(-_xlogx(2 * m["m0"]))
    if cid == "Whi":
        return complex(m["minf"] ** 2 * np.log(m["minf"]))
    if cid == "Web":
        return complex(_xlogx(m["minf"]))
    return 0j


def _f1_closed(cid, m):
    L = np.log
    if cid == "HG":
        m0, m1, mi = m["m0"], m["m1"], m["minf"]
        s = sum(L(m0 + e1 * m1 + e2 * mi) for e1 in (1, -1) for e2 in (1, -1))
        return complex(-(s - L(m0) - L(m1) - L(mi)) / 12)
    if cid == "dHG":
        m1, mi = m["m1"], m["minf"]
        return complex(-(2 * L(m1 + mi) + 2 * L(m1 - mi) - L(m1) - L(mi)) / 12)
    if cid == "Kum":
        m0, mi = m["m0"], m["minf"]
        return complex(-(L(m0 + mi) + L(m0 - mi) - L(m0)) / 12)
    if cid == "Leg":
        mi = m["minf"]
        return complex(-(4 * L(mi) - L(2 * mi)) / 12)
    if cid == "Bes":
        return complex(L(2 * m["m0"]) / 12)
    if cid == "Whi":
        return complex(-L(m["minf"]) / 6)
    if cid == "Web":
        return complex(-L(m["minf"]) / 12)
    return 0j


def partition_series(cid: str, m: dict, g_max: int) -> list[complex]:
    """Coefficients F_0..F_{g_max} of sum hbar^(2g-2) F_g (F_0, F_1 up to
    their ambiguities)."""
    from .curves import check_genericity
    from .errors import NonGeneric

    rep = check_genericity(cid, m)
    if not rep.generic:
        raise NonGeneric(rep)
    return [free_energy_closed(cid, m, g, modulo_ambiguity=True).value for g in range(g_max + 1)]

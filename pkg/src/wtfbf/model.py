"""Spectral density root, harmonizable kernel and second-order oracles.

All exact second-order quantities of the field reduce to integrals of

    16 sin^2(h1 xi1 / 2) sin^2(h2 xi2 / 2) / phi(xi)^2

over the plane. In octant coordinates xi_min = t r, xi_max = r the radial
integral has a closed form (a Mellin-type identity), which leaves a 1D
integral in t. That 1D integral is evaluated with Gauss-Legendre panels,
refined dyadically toward the axis (t -> 0) and toward the kink where
h1 t = h2. An independent route integrates the full 2D integrand over
dyadic rings in r with Filon-Legendre weights; it is used as a
cross-check and for frequency-truncated variances.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import exprel, gamma

from ._quad import (dyadic_toward, filon_cos_weights, gauss_legendre,
                    panel_integrals, panel_nodes)
from .errors import DomainError, QuadratureError
from .meyer import DEFAULT_BANK, EIGHT_PI_3, FOUR_PI_3, TWO_PI_3


@dataclass(frozen=True)
class FieldParams:
    """Weight alpha in [0, 1] and Hurst exponent hurst in (0, 1)."""

    alpha: float
    hurst: float

    def __post_init__(self):
        a, h = self.alpha, self.hurst
        if not (np.isfinite(a) and 0.0 <= a <= 1.0):
            raise DomainError(f"alpha must lie in [0, 1], got {a}")
        if not (np.isfinite(h) and 0.0 < h < 1.0):
            raise DomainError(f"hurst must lie in (0, 1), got {h}")

    @property
    def h_plus(self):
        return (1.0 + self.alpha) * self.hurst

    @property
    def h_minus(self):
        return (1.0 - self.alpha) * self.hurst


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-10
    max_subdivisions: int = 40
    # t-interval (0, axis_exclusion] of the octant handled by dyadic panels
    axis_exclusion: float = 0.5

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if not (0.0 < self.axis_exclusion <= 1.0):
            raise DomainError("axis_exclusion must lie in (0, 1]")

    def accept(self, value, err):
        return np.all(err <= np.maximum(self.abs_tol, self.rel_tol * np.abs(value)))


DEFAULT_QUAD = QuadratureSpec()


# ---------------------------------------------------------------------------
# closed forms

def spectral_density_root(params, xi1, xi2):
    """phi(xi) = min(|xi1|,|xi2|)^(H- + 1/2) * max(|xi1|,|xi2|)^(H+ + 1/2)."""
    a1 = np.abs(np.asarray(xi1, dtype=float))
    a2 = np.abs(np.asarray(xi2, dtype=float))
    if np.any(a1 == 0) or np.any(a2 == 0):
        raise DomainError("spectral density root is undefined on the axes (zero frequency)")
    lo = np.minimum(a1, a2)
    hi = np.maximum(a1, a2)
    out = lo ** (params.h_minus + 0.5) * hi ** (params.h_plus + 0.5)
    return out[()] if out.ndim == 0 else out


def kernel(params, x1, x2, xi1, xi2):
    """K_x(xi) = (exp(i x1 xi1) - 1)(exp(i x2 xi2) - 1) / phi(xi)."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    phi = spectral_density_root(params, xi1, xi2)
    return np.expm1(1j * x1 * xi1) * np.expm1(1j * x2 * xi2) / phi


# ---------------------------------------------------------------------------
# radial reduction
#
# For q = 4H and p = q + 1,
#   int_0^inf 4 sin^2(A r) sin^2(B r) r^-p dr = D(q) g_q(2A, 2B)
# with g_q(u, v) = u^q + v^q - (u+v)^q / 2 - |u-v|^q / 2 and
# D(q) = pi / (2 Gamma(q+1) sin(pi q / 2)). D has a pole at q = 2 that g
# cancels; _dg evaluates D * g_q(x, 1) in a form that is regular there.

_SERIES_TERMS = 12
_SERIES_CUT = 0.25


def _prefactor(q):
    eps = q - 2.0
    return -1.0 / (gamma(q + 1.0) * np.sinc(0.5 * eps))


def _series_coeffs(q):
    # binom(q, 2k) / (q - 2) for k = 2..K
    out = []
    for k in range(2, _SERIES_TERMS + 1):
        num = 1.0
        for i in range(2 * k):
            if i != 2:
                num *= q - i
        den = float(np.prod(np.arange(1, 2 * k + 1, dtype=float)))
        out.append(num / den)
    return np.array(out)


def _xlogx_term(w, eps):
    # w^2 log(w) exprel(eps log w), with the w = 0 limit 0
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    m = w > 0
    lw = np.log(w[m])
    out[m] = w[m] ** 2 * lw * exprel(eps * lw)
    return out


def _dg_unit(y, q):
    """D(q) g_q(y, 1) for 0 <= y <= 1."""
    eps = q - 2.0
    K = _prefactor(q)
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    small = y < _SERIES_CUT
    ys = y[small]
    if ys.size:
        ks = np.arange(2, _SERIES_TERMS + 1)
        powers = ys[..., None] ** (2 * ks)
        tail = powers @ _series_coeffs(q)
        out[small] = K * (_xlogx_term(ys, eps) - 0.5 * (q + 1.0) * ys**2 - tail)
    yb = y[~small]
    if yb.size:
        s = (_xlogx_term(yb, eps) - 0.5 * _xlogx_term(1.0 + yb, eps)
             - 0.5 * _xlogx_term(np.abs(1.0 - yb), eps))
        out[~small] = K * s
    return out


def _dg(x, q):
    """D(q) g_q(x, 1) for x >= 0, using g_q(x, 1) = x^q g_q(1/x, 1)."""
    x = np.asarray(x, dtype=float)
    big = x > 1.0
    y = np.where(big, 1.0 / np.where(big, x, 1.0), x)
    out = _dg_unit(y, q)
    return np.where(big, x**q * out, out)


class _RadialTable:
    """I(z) = int_0^z x^-a D g_q(x, 1) dx for fixed (a, q), any z > 0."""

    def __init__(self, a, q, depth, n=20, n_low=13):
        self.a, self.q, self.depth, self.n, self.n_low = a, q, depth, n, n_low
        left = 2.0 ** -np.arange(depth, 0, -1)                  # 2^-depth .. 1/2
        near1 = 1.0 - 2.0 ** -np.arange(2, depth + 1)           # 3/4 .. 1 - 2^-depth
        right = 1.0 + 2.0 ** -np.arange(depth, -1, -1)          # 1 + 2^-depth .. 2
        self._base = np.concatenate([left, near1, [1.0], right])
        self._extend(4.0)

    def f(self, x):
        x = np.asarray(x, dtype=float)
        return x ** (-self.a) * _dg(x, self.q)

    def _extend(self, zmax):
        top = max(2.0, float(zmax))
        k = int(np.ceil(np.log2(top)))
        extra = 2.0 ** np.arange(2, k + 2)
        self.breaks = np.concatenate([self._base, extra])
        val, err = panel_integrals(self.f, self.breaks[:-1], self.breaks[1:], self.n, self.n_low)
        self.cum = np.concatenate([[0.0], np.cumsum(val)])
        self.cum_err = np.concatenate([[0.0], np.cumsum(err)])
        self.tail, self.tail_err = self._tail(self.breaks[0])

    def _tail(self, x0):
        # power-law extrapolation of int_0^x0, checked against the same
        # extrapolation one dyadic step closer to zero plus the panel between
        xs = np.array([x0, 0.5 * x0, 0.25 * x0])
        fv = self.f(xs)
        vals = []
        for i in range(2):
            fa, fb = fv[i], fv[i + 1]
            if fa == 0.0:
                vals.append(0.0)
                continue
            if fb == 0.0 or np.sign(fa) != np.sign(fb):
                return 0.0, abs(fa) * xs[i]
            e = np.log2(fa / fb)
            if e <= -1.0:
                return np.inf, np.inf
            vals.append(xs[i] * fa / (e + 1.0))
        panel, perr = panel_integrals(self.f, 0.5 * x0, x0, self.n, self.n_low)
        alt = vals[1] + float(panel)
        return vals[0], abs(vals[0] - alt) + float(perr)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        flat = z.ravel()
        if flat.size and flat.max() > self.breaks[-1]:
            self._extend(flat.max())
        out = np.zeros_like(flat)
        err = np.zeros_like(flat)
        pos = flat > 0
        zp = flat[pos]
        i = np.searchsorted(self.breaks, zp, side="right") - 1
        inside = i >= 0
        # z below the first breakpoint: pure tail
        vals = np.empty_like(zp)
        errs = np.empty_like(zp)
        if np.any(~inside):
            for m in np.flatnonzero(~inside):
                v, e = self._tail(zp[m])
                vals[m], errs[m] = v, e
        if np.any(inside):
            ii = i[inside]
            lo = self.breaks[ii]
            part, perr = panel_integrals(self.f, lo, zp[inside], self.n, self.n_low)
            vals[inside] = self.tail + self.cum[ii] + part
            errs[inside] = self.tail_err + self.cum_err[ii] + perr
        out[pos] = vals
        err[pos] = errs
        return out.reshape(z.shape), err.reshape(z.shape)


@lru_cache(maxsize=64)
def _radial_table(alpha, hurst, depth):
    p = FieldParams(alpha, hurst)
    return _RadialTable(2.0 * p.h_minus + 1.0, 4.0 * hurst, depth)


def increment_variance(params, h1, h2, quad=DEFAULT_QUAD, full_output=False):
    """E[(rectangular increment with steps (h1, h2))^2].

    Vectorized over broadcastable h1, h2. With full_output, returns
    (value, error_estimate).
    """
    h1 = np.abs(np.asarray(h1, dtype=float))
    h2 = np.abs(np.asarray(h2, dtype=float))
    h1, h2 = np.broadcast_arrays(h1, h2)
    table = _radial_table(params.alpha, params.hurst, int(quad.max_subdivisions))
    a = 2.0 * params.h_minus + 1.0
    q = 4.0 * params.hurst
    val = np.zeros(h1.shape)
    err = np.zeros(h1.shape)
    m = (h1 > 0) & (h2 > 0)
    if np.any(m):
        u, v = h1[m], h2[m]
        with np.errstate(over="ignore"):
            r = u / v
        if not np.all(np.isfinite(r) & np.isfinite(1.0 / r)):
            raise DomainError("step ratio h1/h2 is outside the floating-point range")
        i12, e12 = table(r)
        i21, e21 = table(1.0 / r)
        c12 = v**q * (v / u) ** (1.0 - a)
        c21 = u**q * (u / v) ** (1.0 - a)
        val[m] = 16.0 * (c12 * i12 + c21 * i21)
        err[m] = 16.0 * (c12 * e12 + c21 * e21)
    if not quad.accept(val, err):
        worst = int(np.argmax(err - quad.rel_tol * np.abs(val)))
        raise QuadratureError(
            f"increment variance did not converge: error estimate {err.flat[worst]:.3e} "
            f"for value {val.flat[worst]:.6e}", val.flat[worst], err.flat[worst])
    if val.ndim == 0:
        val, err = float(val), float(err)
    return (val, err) if full_output else val


def field_variance(params, x1, x2, quad=DEFAULT_QUAD, full_output=False):
    """Var X_x; equal to the rectangular increment from the origin."""
    return increment_variance(params, x1, x2, quad, full_output)


_SIGNS = np.array([1.0, 1.0, -1.0])


def covariance(params, x, y, quad=DEFAULT_QUAD, full_output=False):
    """Cov(X_x, X_y) for points x = (x1, x2), y = (y1, y2).

    Symmetrizing the integrand in each frequency coordinate gives
    Cov = 1/4 sum_{u, v} s_u s_v V(u, v) with u in {x1, y1, x1 - y1},
    v in {x2, y2, x2 - y2}, signs (+, +, -) and V the increment variance.
    """
    us = np.array([x[0], y[0], x[0] - y[0]], dtype=float)
    vs = np.array([x[1], y[1], x[1] - y[1]], dtype=float)
    V, E = increment_variance(params, us[:, None], vs[None, :], quad, full_output=True)
    w = np.outer(_SIGNS, _SIGNS)
    val = 0.25 * float(np.sum(w * V))
    err = 0.25 * float(np.sum(E))
    return (val, err) if full_output else val


def covariance_matrix(params, c1, c2, quad=DEFAULT_QUAD):
    """Gram matrix of the field over the tensor grid c1 x c2 (row-major order).

    `c1`, `c2` are 1D coordinate arrays. Increment variances are tabulated
    once over the distinct absolute offsets per axis.
    """
    def axis_table(c):
        c = np.asarray(c, dtype=float)
        n = c.size
        diff = c[:, None] - c[None, :]
        step = np.diff(c)
        if n > 1 and np.allclose(step, step[0], rtol=1e-12, atol=0.0):
            # uniform grid: exact offsets from index differences
            i = np.arange(n)
            diff = (i[:, None] - i[None, :]) * step[0]
        vals = np.concatenate([np.abs(c), np.abs(diff).ravel()])
        uniq, inv = np.unique(vals, return_inverse=True)
        ic = inv[:n]
        idiff = inv[n:].reshape(n, n)
        idx = np.stack([np.broadcast_to(ic[:, None], (n, n)),
                        np.broadcast_to(ic[None, :], (n, n)), idiff])
        return uniq, idx

    u1, i1 = axis_table(c1)
    u2, i2 = axis_table(c2)
    T = increment_variance(params, u1[:, None], u2[None, :], quad)
    n1, n2 = len(c1), len(c2)
    G = np.zeros((n1, n2, n1, n2))
    for s in range(3):
        for t in range(3):
            blk = T[i1[s][:, None, :, None], i2[t][None, :, None, :]]
            G += _SIGNS[s] * _SIGNS[t] * blk
    G *= 0.25
    return G.reshape(n1 * n2, n1 * n2)


# ---------------------------------------------------------------------------
# independent 2D route: dyadic rings in r = max|xi|, Filon in r

def _octant_ring_integral(a, p, ha, hb, t_nodes, t_weights, rings, n_r, thresh):
    """Per-ring sums over t nodes of 16 s(ha t r) s(hb r) t^-a r^-p."""
    xr, wr = gauss_legendre(n_r)
    wa = ha * t_nodes            # frequency of the min-coordinate factor
    wb = np.full_like(t_nodes, hb)
    tw = t_weights * t_nodes ** (-a)
    per_ring = np.zeros(len(rings))
    for k, (r0, r1) in enumerate(rings):
        c, h = 0.5 * (r0 + r1), 0.5 * (r1 - r0)
        r = c + h * xr
        base = r ** (-p)
        osc_a = wa * r1 > thresh
        osc_b = wb * r1 > thresh
        inner = np.empty_like(t_nodes)
        # neither factor oscillates: plain Gauss
        m = ~osc_a & ~osc_b
        if np.any(m):
            sa = np.sin(0.5 * wa[m, None] * r) ** 2
            sb = np.sin(0.5 * wb[m, None] * r) ** 2
            inner[m] = h * np.sum(16.0 * sa * sb * base * wr, axis=1)
        # one factor oscillates: 16 s_a s_b = 8 s_smooth (1 - cos(w_osc r))
        for smooth_w, osc_w, m in ((wa, wb, ~osc_a & osc_b), (wb, wa, osc_a & ~osc_b)):
            if np.any(m):
                g = 8.0 * np.sin(0.5 * smooth_w[m, None] * r) ** 2 * base
                plain = h * np.sum(g * wr, axis=1)
                W = filon_cos_weights(osc_w[m], r0, r1, n_r)
                inner[m] = plain - np.sum(g * W, axis=1)
        # both oscillate: expand into cosines
        m = osc_a & osc_b
        if np.any(m):
            A, B = wa[m], wb[m]
            g = 4.0 * base
            plain = h * np.sum(g * wr)
            acc = plain - np.sum(g * filon_cos_weights(A, r0, r1, n_r), axis=1)
            acc -= np.sum(g * filon_cos_weights(B, r0, r1, n_r), axis=1)
            acc += 0.5 * np.sum(g * filon_cos_weights(A + B, r0, r1, n_r), axis=1)
            acc += 0.5 * np.sum(g * filon_cos_weights(A - B, r0, r1, n_r), axis=1)
            inner[m] = acc
        per_ring[k] = float(np.sum(tw * inner))
    return per_ring


def _t_panels(tstar, axis_exclusion, depth):
    """Panels in t on (0, 1]: dyadic toward 0 and toward the kink tstar."""
    pts = [1.0]
    pts.extend(dyadic_toward(0.0, axis_exclusion, depth))
    if axis_exclusion < 1.0:
        pts.extend(np.linspace(axis_exclusion, 1.0, 3))
    if 0.0 < tstar < 1.0:
        gap = min(tstar, 1.0 - tstar)
        pts.extend(dyadic_toward(tstar, tstar - 0.5 * gap, depth // 2))
        pts.extend(dyadic_toward(tstar, tstar + 0.5 * gap, depth // 2))
        pts.append(tstar)
    pts = np.unique(np.asarray(pts))
    return pts[:-1], pts[1:]


def ring_increment_variance(params, h1, h2, depth=20, quad=DEFAULT_QUAD,
                            xi_max=None, n_r=16, n_t=16, thresh=2.0):
    """Increment variance by direct 2D quadrature over dyadic rings.

    Rings 2^m <= r / r0 < 2^(m+1), m = -depth .. depth-1, with
    r0 = 1 / max(|h1|, |h2|) and r = max(|xi1|, |xi2|). Each octant is
    parametrized by t = xi_min / xi_max. With `xi_max`, frequencies with
    max(|xi1|, |xi2|) > xi_max are dropped (box truncation).

    Ring contributions decay geometrically at both ends; the neglected
    rings are added as a geometric series fitted to the two outermost
    rings on each side (the upper side only without `xi_max`).
    """
    h1, h2 = abs(float(h1)), abs(float(h2))
    if h1 == 0.0 or h2 == 0.0:
        return 0.0
    a = 2.0 * params.h_minus + 1.0
    p = 4.0 * params.hurst + 1.0
    r0 = 1.0 / max(h1, h2)
    rings = []
    clipped = False
    for m in range(-depth, depth):
        lo, hi = r0 * 2.0**m, r0 * 2.0 ** (m + 1)
        if xi_max is not None:
            if lo >= xi_max:
                clipped = True
                break
            clipped = clipped or hi >= xi_max
            hi = min(hi, xi_max)
        rings.append((lo, hi))
    S = np.zeros(len(rings))
    for ha, hb in ((h1, h2), (h2, h1)):
        # octant where the ha-coordinate is the smaller frequency
        tstar = hb / ha
        lo, hi = _t_panels(tstar, quad.axis_exclusion, quad.max_subdivisions)
        t, w = panel_nodes(lo, hi, n_t)
        S += _octant_ring_integral(a, p, ha, hb, t.ravel(), w.ravel(),
                                   rings, n_r, thresh)
    total = float(np.sum(S))
    if len(S) >= 2:
        total += _geometric_tail(S[0], S[1])
        if not clipped:
            total += _geometric_tail(S[-1], S[-2])
    return 4.0 * total


def _geometric_tail(last, prev):
    if last <= 0.0 or prev <= 0.0:
        return 0.0
    rho = last / prev
    return last * rho / (1.0 - rho) if rho < 1.0 else 0.0


def truncation_tail(params, x1, x2, xi_max, quad=DEFAULT_QUAD, depth=24):
    """Relative share of Var X_x carried by frequencies outside [-xi_max, xi_max]^2."""
    full = field_variance(params, x1, x2, quad)
    if full == 0.0:
        return 0.0
    box = ring_increment_variance(params, x1, x2, depth=depth, quad=quad, xi_max=xi_max)
    return max(0.0, (full - box) / full)


# ---------------------------------------------------------------------------
# wavelet coefficient variances

_SUPPORT = (TWO_PI_3, FOUR_PI_3, EIGHT_PI_3)


def _gauss_over(breaks, n):
    breaks = np.unique(np.asarray(breaks, dtype=float))
    x, w = panel_nodes(breaks[:-1], breaks[1:], n)
    return x.ravel(), w.ravel()


def coeff_variance_exact(params, j1, j2, bank=DEFAULT_BANK, quad=DEFAULT_QUAD,
                         full_output=False, n=24):
    """E|c_{j,k}|^2 = int |psi_hat(2^-j1 xi1)|^2 |psi_hat(2^-j2 xi2)|^2 / phi^2 dxi."""
    j1, j2 = int(j1), int(j2)
    if j1 < 0 or j2 < 0:
        raise DomainError("coefficient variance needs levels j1, j2 >= 0 "
                          "(the scaling level is not square integrable against phi^-2)")
    a = 2.0 * params.h_minus + 1.0
    b = 2.0 * params.h_plus + 1.0
    rho = 2.0 ** (j1 - j2)       # diagonal 2^j1 eta1 = 2^j2 eta2 is eta2 = rho eta1
    s1, s2 = 2.0**j1, 2.0**j2

    def integrate(order):
        lo, hi = _SUPPORT[0], _SUPPORT[-1]
        ob = list(_SUPPORT) + [v / rho for v in _SUPPORT if lo < v / rho < hi]
        x1, w1 = _gauss_over(ob, order)
        total = 0.0
        b1 = bank.psi_abs(x1) ** 2
        for e1, we, pe in zip(x1, w1, b1):
            ib = list(_SUPPORT)
            d = rho * e1
            if lo < d < hi:
                ib.append(d)
            x2, w2 = _gauss_over(ib, order)
            xi1 = s1 * e1
            xi2 = s2 * x2
            mn = np.minimum(xi1, xi2)
            mx = np.maximum(xi1, xi2)
            g = bank.psi_abs(x2) ** 2 / (mn**a * mx**b)
            total += we * pe * np.sum(w2 * g)
        return 4.0 * s1 * s2 * total

    val = integrate(n)
    err = abs(val - integrate(n - 8))
    if not quad.accept(val, err):
        raise QuadratureError(f"coefficient variance did not converge: error {err:.3e}", val, err)
    return (val, err) if full_output else val


def psi_moment_1d(exponent, bank=DEFAULT_BANK, n=40):
    """int_R |psi_hat(eta)|^2 / |eta|^exponent d eta."""
    x, w = _gauss_over(_SUPPORT, n)
    return 2.0 * float(np.sum(w * bank.psi_abs(x) ** 2 * x ** (-exponent)))


def coeff_constant_c1(params, bank=DEFAULT_BANK):
    """Product of the two 1D integrals that fix E|c|^2 when |j1 - j2| > 1."""
    return (psi_moment_1d(2.0 * params.h_plus + 1.0, bank)
            * psi_moment_1d(2.0 * params.h_minus + 1.0, bank))

"""Low-level quadrature helpers shared by the oracles.

Gauss-Legendre panels with an embedded error estimate, Filon-Legendre
weights for oscillatory panels, and dyadic panel generators.
"""
from functools import lru_cache

import numpy as np
from scipy.special import spherical_jn


@lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(a, b, n):
    """Nodes and weights of an n-point rule on each panel [a_i, b_i].

    `a` and `b` broadcast; the result has a trailing axis of length n.
    """
    x, w = gauss_legendre(n)
    a = np.asarray(a, float)[..., None]
    b = np.asarray(b, float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def panel_integrals(f, a, b, n=20, n_low=13):
    """Integrate f over each panel with two Gauss orders.

    Returns (values, error_estimates) per panel. `f` must accept an array
    of nodes of shape (..., n) and return values of the same shape.
    """
    xs, ws = panel_nodes(a, b, n)
    hi = np.sum(f(xs) * ws, axis=-1)
    xs, ws = panel_nodes(a, b, n_low)
    lo = np.sum(f(xs) * ws, axis=-1)
    return hi, np.abs(hi - lo)


def dyadic_toward(point, start, depth):
    """Breakpoints start, ..., approaching `point` by halving the gap.

    Returns depth+1 points ordered from `start` toward `point`
    (the point itself is excluded).
    """
    gap = start - point
    return point + gap * 0.5 ** np.arange(depth + 1)


@lru_cache(maxsize=None)
def _filon_matrix(n):
    # row k: (2k+1) P_k(x_i) w_i
    x, w = gauss_legendre(n)
    P = np.polynomial.legendre.legvander(x, n - 1).T
    k = np.arange(n)[:, None]
    return (2 * k + 1) * P * w[None, :]


def filon_cos_weights(omega, a, b, n=16):
    """Weights W_i with sum_i f(x_i) W_i ~ int_a^b f(x) cos(omega x) dx.

    The x_i are the n-point Gauss nodes on [a, b]; f is replaced by its
    degree n-1 interpolant and the resulting moments are exact, so the
    rule stays accurate for arbitrarily large omega. `omega`, `a`, `b`
    broadcast; output gets a trailing axis of length n.
    """
    omega = np.asarray(omega, float)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    Om = np.abs(omega * h)[..., None]
    k = np.arange(n)
    jk = spherical_jn(k, Om)
    # i^k j_k(Omega), with the sign of omega folded in (j_k parity)
    sgn = np.sign(omega)[..., None] ** k
    coef = (1j ** k) * jk * sgn
    mom = coef @ _filon_matrix(n)
    phase = np.exp(1j * omega * c)[..., None]
    return h[..., None] * np.real(phase * mom)

"""Weighted tensorized Besov sequence norms, Littlewood-Paley norms and Hoelder tests.

Level exponents are written as (max + min) + alpha (max - min) so that the
endpoint identities (alpha = 0 gives j1 + j2, alpha = 1 gives 2 max) and
the norm coincidences of the optimality witnesses hold exactly in floating
point, not just up to rounding.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LevelTooDeepError
from .hyperbolic import HyperbolicCoeffs, lp_block_hyperbolic, lp_max_level, zero_coeffs

CONVENTIONS = ("printed", "smoothness")
MEMBER_GROWTH = 1.2


@dataclass(frozen=True)
class BesovSpec:
    s: float
    alpha: float
    p: float = np.inf
    q: float = np.inf

    def __post_init__(self):
        if not np.isfinite(self.s):
            raise DomainError("smoothness s must be finite")
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("p", "q"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"{name} must be > 0 or inf, got {v}")


def _mx_mn(j1, j2, clamp=False):
    if clamp:
        j1, j2 = max(j1, 0), max(j2, 0)
    return float(max(j1, j2)), float(min(j1, j2))


def level_exponent(alpha, j1, j2, clamp=False):
    """(1 + alpha) max(j) + (1 - alpha) min(j), evaluated in a rounding-stable form."""
    mx, mn = _mx_mn(j1, j2, clamp)
    return (mx + mn) + alpha * (mx - mn)


def weight(spec, j1, j2):
    return 2.0 ** (level_exponent(spec.alpha, j1, j2) * spec.s)


# exponent families used by the embedding report; each maps (mx, mn) to
# the level exponent before multiplication by s
def _family(kind, alpha):
    if kind == "T":
        return lambda mx, mn: (mx + mn) + alpha * (mx - mn)
    if kind == "S":        # mixed smoothness at regularity (1 + beta) s
        return lambda mx, mn: (mx + mn) + alpha * (mx + mn)
    if kind == "B":        # hyperbolic isotropic at regularity (1 + beta) s
        return lambda mx, mn: mx + alpha * mx
    raise ValueError(kind)


def _blocks(coeffs):
    return coeffs.blocks if isinstance(coeffs, HyperbolicCoeffs) else coeffs


def _combine(terms, q):
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        return 0.0
    if np.isinf(q):
        return float(terms.max())
    return float(np.sum(terms ** q) ** (1.0 / q))


def _lp(values, p):
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(a.max())
    return float(np.sum(a ** p) ** (1.0 / p))


def _norm(blocks, expo, s, p, q, sign=1.0, clamp=False):
    terms = []
    for (j1, j2), b in blocks.items():
        b = np.asarray(b, dtype=float)
        if not np.all(np.isfinite(b)):
            raise DomainError("coefficients must be finite")
        mx, mn = _mx_mn(j1, j2, clamp)
        e = sign * expo(mx, mn) * s
        if not np.isinf(p):
            e -= (mx + mn) / p
        terms.append(2.0 ** e * _lp(b, p))
    return _combine(terms, q)


def sequence_norm(coeffs, spec, convention="printed"):
    """Discrete t^{s,alpha}_{p,q} b (quasi-)norm of L-infinity normalized coefficients.

    Level terms are 2^(-(j1 + j2)/p) 2^(sign e(j) s) ||c_j||_p with
    e(j) = (1 + alpha) max + (1 - alpha) min, combined in l^q; p or q = inf
    use maxima. convention="printed" uses sign = -1, "smoothness" uses
    sign = +1 (the weighting under which finite norms mean regularity s).
    """
    if convention not in CONVENTIONS:
        raise DomainError(f"convention must be one of {CONVENTIONS}")
    sign = -1.0 if convention == "printed" else 1.0
    return _norm(_blocks(coeffs), _family("T", spec.alpha), spec.s, spec.p, spec.q, sign)


def lp_norm(field, spec, J):
    """Besov norm from hyperbolic Littlewood-Paley blocks 0 <= j1, j2 <= J.

    ||Delta_j f||_p is the grid quadrature (sum |f|^p dx1 dx2)^(1/p).
    """
    top = lp_max_level(field.grid)
    if J < 0 or J > top:
        raise LevelTooDeepError(f"LP level {J} outside 0..{top} for this grid")
    cell = field.grid.dx1 * field.grid.dx2
    terms = []
    for j1 in range(J + 1):
        for j2 in range(J + 1):
            blk = lp_block_hyperbolic(field, j1, j2).values
            if np.isinf(spec.p):
                n = float(np.abs(blk).max())
            else:
                n = float((np.sum(np.abs(blk) ** spec.p) * cell) ** (1.0 / spec.p))
            terms.append(weight(spec, j1, j2) * n)
    return _combine(terms, spec.q)


def holder_membership(coeffs, s, alpha):
    """(member, sup_constant) for the weighted tensorized Hoelder test.

    sup_constant is the sup of 2^(e(j) s) |c_{j,k}| over all levels and
    interior translations. Levels are grouped by l = max(j); with M(l)
    the running maximum over groups up to l, the verdict is member when
    M(J) <= 1.2 M(J - 2).
    """
    J = coeffs.max_level
    group = {}
    for (j1, j2) in coeffs.levels():
        b = coeffs.interior_block(j1, j2)
        if b.size == 0:
            continue
        # divide by the critical decay so that coefficients sitting exactly
        # on it give exactly 1
        w = float(np.abs(b).max()) / 2.0 ** (-level_exponent(alpha, j1, j2) * s)
        l = max(j1, j2)
        group[l] = max(group.get(l, 0.0), w)
    if not group:
        raise DomainError("no interior coefficients to test")
    levels = sorted(group)
    running, m = {}, 0.0
    for l in levels:
        m = max(m, group[l])
        running[l] = m
    top = levels[-1]
    ref = max((l for l in levels if l <= top - 2), default=levels[0])
    sup = running[top]
    member = sup <= MEMBER_GROWTH * running[ref]
    return bool(member), float(sup)


@dataclass(frozen=True)
class EmbeddingReport:
    norms: dict            # name -> value
    checks: dict           # inequality label -> bool
    ok: bool


def embedding_norms(coeffs, s, alpha, p, q):
    """The five sequence norms compared by the embedding report.

    All use the smoothness sign and treat level -1 as level 0 (the
    exponent comparisons only hold termwise for nonnegative levels).
    """
    b = _blocks(coeffs)
    fam_T = _family("T", alpha)
    out = {
        "T": _norm(b, fam_T, s, p, q, clamp=True),
        "S_(1+a)s": _norm(b, _family("S", alpha), s, p, q, clamp=True),
        "S_s": _norm(b, _family("S", 0.0), s, p, q, clamp=True),
        "Btilde_2s": _norm(b, _family("B", 1.0), s, p, q, clamp=True),
        "Btilde_(1+a)s": _norm(b, _family("B", alpha), s, p, q, clamp=True),
    }
    return out


def embedding_check(coeffs, s, alpha, p, q, rtol=1e-12):
    if s < 0:
        raise DomainError("embedding comparisons need s >= 0")
    n = embedding_norms(coeffs, s, alpha, p, q)

    def le(a, b):
        return n[a] <= n[b] * (1.0 + rtol)

    checks = {
        "T <= S_(1+a)s": le("T", "S_(1+a)s"),
        "S_s <= T": le("S_s", "T"),
        "T <= Btilde_2s": le("T", "Btilde_2s"),
        "Btilde_(1+a)s <= T": le("Btilde_(1+a)s", "T"),
    }
    return EmbeddingReport(n, checks, all(checks.values()))


def _witness_grid(J):
    from .synthesis import GridSpec
    return GridSpec.square(2 ** (J + 2), 1.0)


def optimality_witnesses(spec, J):
    """Coefficient sets attaining the outer embeddings.

    (a) a tensor u(x1) g(x2): nonzero only for j1 in {-1, 0}, one
        coefficient per level j2 with amplitude chosen so the level term
        is (j2 + 2)^(-2/q);
    (b) a diagonal lacunary set: one coefficient at each level (j, j),
        1 <= j <= J, whose level term is j^(-2/q).
    Level terms refer to the smoothness-sign norms of embedding_norms.
    """
    if J < 4:
        raise DomainError("witnesses need J >= 4")
    s, alpha, p, q = spec.s, spec.alpha, spec.p, spec.q
    grid = _witness_grid(J)
    inv_p = 0.0 if np.isinf(p) else 1.0 / p
    inv_q = 0.0 if np.isinf(q) else 1.0 / q
    a = zero_coeffs(grid, J)
    for j1 in (-1, 0):
        for j2 in range(-1, J + 1):
            mx, mn = _mx_mn(j1, j2, clamp=True)
            amp = (j2 + 2.0) ** (-2.0 * inv_q) * 2.0 ** (-_family("T", alpha)(mx, mn) * s
                                                        + (mx + mn) * inv_p)
            a.blocks[(j1, j2)][0, 0] = amp
    b = zero_coeffs(grid, J)
    for j in range(1, J + 1):
        mx = float(j)
        amp = j ** (-2.0 * inv_q) * 2.0 ** (-_family("T", alpha)(mx, mx) * s + 2.0 * mx * inv_p)
        b.blocks[(j, j)][0, 0] = amp
    return a, b

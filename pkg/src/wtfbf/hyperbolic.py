"""Hyperbolic Meyer wavelet analysis and synthesis on periodized grids.

Coefficients use the L-infinity normalization

    c_{j,k} = 2^(j1' + j2') <f, psi(2^j1 x1 - k1) psi(2^j2 x2 - k2)>,
    j' = max(j, 0),

with the scaling function phi(x - k) in place of psi at level -1, so that
f = sum c_{j,k} psi(2^j1 x1 - k1) psi(2^j2 x2 - k2). Translations are
relative to the grid origin: block index k at level j is the atom
positioned at x_min + k 2^-j' (the wavelet itself is centered half a
step to the left, at x_min + (k - 1/2) 2^-j).

Per axis the analysis is a circular convolution with the conjugated
level filter followed by subsampling, carried out with FFTs.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EnsembleMismatchError, LevelTooDeepError
from .meyer import DEFAULT_BANK, nu
from .synthesis import FieldRealization

ANALYSIS_MARGIN = 0.125  # taper fraction used for statistics on non-periodic fields
STAT_MARGIN = 2          # coefficients dropped next to the taper zone


@dataclass(eq=False)
class HyperbolicCoeffs:
    blocks: dict
    max_level: int
    grid: object
    params: object = None
    seed: int = 0
    margin: float = 0.0

    def levels(self):
        return sorted(self.blocks)

    def __getitem__(self, jbar):
        return self.blocks[tuple(jbar)]

    def spacing(self, j):
        return 2.0 ** -max(j, 0)

    def interior(self, axis, j):
        """Indices of translations at level j along `axis` usable for statistics.

        A translation is kept when its atom center lies in the untapered
        part of the domain, at least STAT_MARGIN spacings from the taper.
        """
        g = self.grid
        lo, hi = (g.x1_min, g.x1_max) if axis == 0 else (g.x2_min, g.x2_max)
        L = hi - lo
        h = self.spacing(j)
        count = self.blocks[(j, -1)].shape[0] if axis == 0 else self.blocks[(-1, j)].shape[1]
        k = np.arange(count)
        center = lo + (k - 0.5) * h if j >= 0 else lo + k * h
        cut = self.margin * L + STAT_MARGIN * h
        return k[(center >= lo + cut) & (center <= hi - cut)]

    def interior_block(self, j1, j2):
        b = self.blocks[(j1, j2)]
        return b[np.ix_(self.interior(0, j1), self.interior(1, j2))]

    def copy_with(self, blocks):
        return HyperbolicCoeffs(blocks, self.max_level, self.grid, self.params,
                                self.seed, self.margin)

    def to_l2(self):
        """Coefficients in the L2-orthonormal normalization."""
        return {jb: b * 2.0 ** (-0.5 * (max(jb[0], 0) + max(jb[1], 0)))
                for jb, b in self.blocks.items()}

    def map(self, fn):
        return self.copy_with({jb: fn(b) for jb, b in self.blocks.items()})

    def __add__(self, other):
        return self.copy_with({jb: b + other.blocks[jb] for jb, b in self.blocks.items()})

    def __mul__(self, a):
        return self.map(lambda b: a * b)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# grid bookkeeping

def _axis_info(n, lo, hi):
    L = hi - lo
    dx = L / n
    return L, dx


def max_level(grid):
    """Largest J with 8 pi / 3 * 2^J <= pi / dx on both axes."""
    dx = max(grid.dx1, grid.dx2)
    return int(np.floor(np.log2(3.0 / (8.0 * dx)) + 1e-12))


def _stride(j, dx, n):
    s = 2.0 ** -max(j, 0) / dx
    k = int(round(s))
    if k < 1 or abs(s - k) > 1e-9 * s or n % k:
        raise DomainError("grid is not square-periodizable: spacing must divide "
                          "2^-j and the period must hold whole translations")
    return k


def check_grid(grid, J):
    if J < 0:
        raise LevelTooDeepError("max level must be >= 0")
    if J > max_level(grid):
        raise LevelTooDeepError(
            f"level {J} too deep for grid spacing {max(grid.dx1, grid.dx2):.6g}; "
            f"max level is {max_level(grid)}")
    for n, dx in ((grid.n1, grid.dx1), (grid.n2, grid.dx2)):
        for j in range(-1, J + 1):
            _stride(j, dx, n)


def taper_window(n, margin):
    """Smooth ramp (nu profile) over `margin` * n points at both ends."""
    w = np.ones(n)
    m = margin * n
    if m <= 0:
        return w
    i = np.arange(n) + 0.5
    up = i < m
    w[up] = nu(i[up] / m)
    dn = i > n - m
    w[dn] = nu((n - i[dn]) / m)
    return w


# ---------------------------------------------------------------------------
# transforms

def _filters(bank, J, n, dx):
    return {j: bank.sampled(j, n, dx) for j in range(-1, J + 1)}


def analyze(field, J, bank=DEFAULT_BANK, margin=0.0):
    """Hyperbolic wavelet coefficients of a gridded field up to level J.

    With margin=0 the samples are treated as one period of a periodic
    function and analyze/synthesize are exact inverses. For fields that
    are not periodic, pass margin=ANALYSIS_MARGIN: the field is multiplied
    by a smooth taper over that fraction of each end first, and
    statistics only use coefficients away from the tapered zone.
    """
    grid = field.grid
    check_grid(grid, J)
    v = np.asarray(field.values, dtype=float)
    if margin > 0:
        v = v * np.outer(taper_window(grid.n1, margin), taper_window(grid.n2, margin))
    g1 = _filters(bank, J, grid.n1, grid.dx1)
    g2 = _filters(bank, J, grid.n2, grid.dx2)
    F2 = np.fft.fft(v, axis=1)
    blocks = {}
    for j2 in range(-1, J + 1):
        s2 = _stride(j2, grid.dx2, grid.n2)
        Z = np.fft.ifft(F2 * np.conj(g2[j2])[None, :], axis=1)[:, ::s2]
        F1 = np.fft.fft(Z, axis=0)
        for j1 in range(-1, J + 1):
            s1 = _stride(j1, grid.dx1, grid.n1)
            c = np.fft.ifft(F1 * np.conj(g1[j1])[:, None], axis=0)[::s1, :]
            blocks[(j1, j2)] = c.real.copy()
    return HyperbolicCoeffs(blocks, J, grid, getattr(field, "params", None),
                            getattr(field, "seed", 0), margin)


def _upsample(c, stride, n, axis):
    shape = list(c.shape)
    shape[axis] = n
    out = np.zeros(shape, dtype=complex)
    idx = [slice(None)] * c.ndim
    idx[axis] = slice(None, None, stride)
    out[tuple(idx)] = c
    return out


def synthesize(coeffs, bank=DEFAULT_BANK):
    """Field sum_{j,k} c_{j,k} psi(2^j1 x1 - k1) psi(2^j2 x2 - k2) on the grid."""
    grid = coeffs.grid
    J = coeffs.max_level
    check_grid(grid, J)
    g1 = _filters(bank, J, grid.n1, grid.dx1)
    g2 = _filters(bank, J, grid.n2, grid.dx2)
    out = np.zeros(grid.shape, dtype=complex)
    for j1 in range(-1, J + 1):
        s1 = _stride(j1, grid.dx1, grid.n1)
        acc = None
        for j2 in range(-1, J + 1):
            s2 = _stride(j2, grid.dx2, grid.n2)
            b = coeffs.blocks[(j1, j2)]
            want = (grid.n1 // s1, grid.n2 // s2)
            if b.shape != want:
                raise DomainError(f"block {(j1, j2)} has shape {b.shape}, expected {want}")
            U = np.fft.fft(_upsample(b, s2, grid.n2, 1), axis=1) * (g2[j2] * s2)[None, :]
            acc = U if acc is None else acc + U
        T = np.fft.ifft(acc, axis=1)
        out += np.fft.ifft(np.fft.fft(_upsample(T, s1, grid.n1, 0), axis=0)
                           * (g1[j1] * s1)[:, None], axis=0)
    return FieldRealization(out.real, grid, coeffs.params if coeffs.params is not None
                            else _dummy_params(), coeffs.seed, "synthesis")


def _dummy_params():
    from .model import FieldParams
    return FieldParams(0.0, 0.5)


def zero_coeffs(grid, J, params=None, margin=0.0):
    check_grid(grid, J)
    blocks = {}
    for j1 in range(-1, J + 1):
        for j2 in range(-1, J + 1):
            blocks[(j1, j2)] = np.zeros((grid.n1 // _stride(j1, grid.dx1, grid.n1),
                                         grid.n2 // _stride(j2, grid.dx2, grid.n2)))
    return HyperbolicCoeffs(blocks, J, grid, params, 0, margin)


# ---------------------------------------------------------------------------
# Littlewood-Paley blocks

def theta0(bank, xi):
    """Profile equal to 1 on [-1, 1] and 0 outside (-2, 2)."""
    return bank.phi_hat(2.0 * np.pi / 3.0 * np.asarray(xi, dtype=float))


def theta(bank, j, xi):
    xi = np.asarray(xi, dtype=float)
    if j == 0:
        return theta0(bank, xi)
    return theta0(bank, np.ldexp(xi, -j)) - theta0(bank, np.ldexp(xi, -(j - 1)))


def lp_max_level(grid):
    """Smallest J with 2^J >= the Nyquist frequency of both axes."""
    nyq = max(np.pi / grid.dx1, np.pi / grid.dx2)
    return int(np.ceil(np.log2(nyq) - 1e-12))


def _lp_check(grid, *levels):
    top = lp_max_level(grid)
    for j in levels:
        if j < 0 or j > top:
            raise LevelTooDeepError(f"LP level {j} outside 0..{top} for this grid")


def _apply_multiplier(field, m1, m2):
    F = np.fft.fft2(field.values)
    out = np.fft.ifft2(F * np.outer(m1, m2))
    return field.with_values(out.real)


def lp_block_hyperbolic(field, j1, j2, bank=DEFAULT_BANK):
    grid = field.grid
    _lp_check(grid, j1, j2)
    xi1 = 2.0 * np.pi * np.fft.fftfreq(grid.n1, grid.dx1)
    xi2 = 2.0 * np.pi * np.fft.fftfreq(grid.n2, grid.dx2)
    return _apply_multiplier(field, theta(bank, j1, xi1), theta(bank, j2, xi2))


def lp_block_classical(field, j, bank=DEFAULT_BANK):
    grid = field.grid
    _lp_check(grid, j)
    xi1 = 2.0 * np.pi * np.fft.fftfreq(grid.n1, grid.dx1)
    xi2 = 2.0 * np.pi * np.fft.fftfreq(grid.n2, grid.dx2)
    F = np.fft.fft2(field.values)
    m = np.outer(theta0(bank, np.ldexp(xi1, -j)), theta0(bank, np.ldexp(xi2, -j)))
    if j > 0:
        m = m - np.outer(theta0(bank, np.ldexp(xi1, -(j - 1))),
                         theta0(bank, np.ldexp(xi2, -(j - 1))))
    return field.with_values(np.fft.ifft2(F * m).real)


# ---------------------------------------------------------------------------
# ensemble statistics

def analyze_ensemble(realizations, J, bank=DEFAULT_BANK, margin=ANALYSIS_MARGIN, threads=None):
    from .parallel import pmap
    return pmap(lambda f: analyze(f, J, bank, margin), realizations, threads)


def _check(ensemble, minimum):
    if len(ensemble) < minimum:
        raise EnsembleMismatchError(f"need at least {minimum} members, got {len(ensemble)}")
    first = ensemble[0]
    for c in ensemble[1:]:
        if (c.grid != first.grid or c.max_level != first.max_level
                or c.margin != first.margin or c.params != first.params):
            raise EnsembleMismatchError("ensemble members differ in grid, levels, taper or parameters")


def member_level_means(coeffs, levels=None):
    """Mean |c|^2 over interior translations, per level pair, for one member."""
    out = {}
    for jb in (levels or coeffs.levels()):
        b = coeffs.interior_block(*jb)
        if b.size:
            out[jb] = float(np.mean(b * b))
    return out


def level_moments(ensemble, minimum=30):
    """(mean |c|^2, standard error) per level pair, pooling interior translations."""
    _check(ensemble, minimum)
    per = [member_level_means(c) for c in ensemble]
    out = {}
    for jb in per[0]:
        x = np.array([p[jb] for p in per])
        se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
        out[jb] = (float(x.mean()), se)
    return out


def cross_level_correlation(ensemble, jbar, jbar2, k, k2, minimum=30):
    """Pearson correlation of c_{jbar,k} and c_{jbar2,k2} across the ensemble."""
    _check(ensemble, minimum)
    a = np.array([c.blocks[tuple(jbar)][tuple(k)] for c in ensemble])
    b = np.array([c.blocks[tuple(jbar2)][tuple(k2)] for c in ensemble])
    n = a.size
    if a.std() == 0 or b.std() == 0:
        return float("nan"), float("nan")
    r = float(np.corrcoef(a, b)[0, 1])
    return r, float((1.0 - r * r) / np.sqrt(n - 1))

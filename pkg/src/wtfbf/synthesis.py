"""Gaussian realizations of the field on rectangular grids.

Two paths: exact Cholesky sampling from the quadrature covariance (small
grids) and a Riemann-sum discretization of the harmonizable integral over
a tensor grid of log-spaced frequency cells (large grids).
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import rng
from .errors import DomainError, NotPositiveDefiniteError
from .model import DEFAULT_QUAD, FieldParams, covariance_matrix, truncation_tail
from .parallel import pmap

METHODS = ("cholesky", "spectral")
CHOLESKY_MAX_POINTS = 4096


@dataclass(frozen=True)
class GridSpec:
    """Half-open grid x_i = x_min + i (x_max - x_min) / n, i = 0..n-1, per axis."""

    n1: int
    n2: int
    x1_min: float = 0.0
    x1_max: float = 1.0
    x2_min: float = 0.0
    x2_max: float = 1.0

    def __post_init__(self):
        if int(self.n1) < 2 or int(self.n2) < 2:
            raise DomainError(f"grid needs n1, n2 >= 2, got ({self.n1}, {self.n2})")
        ext = (self.x1_min, self.x1_max, self.x2_min, self.x2_max)
        if not all(np.isfinite(ext)):
            raise DomainError("grid extents must be finite")
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise DomainError("grid extents need min < max on both axes")

    @classmethod
    def square(cls, n, extent=1.0, origin=0.0):
        return cls(n, n, origin, origin + extent, origin, origin + extent)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def dx1(self):
        return (self.x1_max - self.x1_min) / self.n1

    @property
    def dx2(self):
        return (self.x2_max - self.x2_min) / self.n2

    def coords(self):
        c1 = self.x1_min + np.arange(self.n1) * self.dx1
        c2 = self.x2_min + np.arange(self.n2) * self.dx2
        return c1, c2

    def max_abs(self):
        return float(np.hypot(max(abs(self.x1_min), abs(self.x1_max)),
                              max(abs(self.x2_min), abs(self.x2_max))))


@dataclass(frozen=True, eq=False)
class FieldRealization:
    values: np.ndarray
    grid: GridSpec
    params: FieldParams
    seed: int = 0
    method: str = "spectral"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DomainError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        object.__setattr__(self, "values", v)

    def with_values(self, values):
        return FieldRealization(values, self.grid, self.params, self.seed, self.method)


# ---------------------------------------------------------------------------
# frequency grid

@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Tensor grid of frequency cells symmetric under xi -> -xi.

    Per axis the positive half-line (xi_lo, xi_max] is cut into log-spaced
    cells; the cells of the plane are products of signed 1D cells, so no
    cell touches an axis and cell c pairs with -c. With `jitter`, each
    realization draws its nodes uniformly inside the cells, which makes
    the discretized variance an unbiased estimate of the box integral.
    """

    edges1: np.ndarray
    edges2: np.ndarray
    jitter: bool = True
    xi_max: tuple = field(default=(0.0, 0.0))
    axis_depth: int = 8

    @property
    def size(self):
        return 4 * (len(self.edges1) - 1) * (len(self.edges2) - 1)

    def nodes(self, seed=None):
        """Positive 1D nodes and widths per axis, jittered from `seed` if enabled."""
        out = []
        for i, e in enumerate((self.edges1, self.edges2)):
            lo, hi = e[:-1], e[1:]
            if self.jitter and seed is not None:
                u = rng.uniform(rng.derive_stream(seed, 100 + i), lo.size)
                # uniform in (0, 1]; map to the open cell interior
                x = lo + (hi - lo) * np.clip(u, 1e-12, 1 - 1e-12)
            else:
                x = 0.5 * (lo + hi)
            out.append((x, hi - lo))
        return out

    def all_cells(self, seed=None):
        """Centers (N x 2) and measures (N) of every cell of the plane."""
        (x1, w1), (x2, w2) = self.nodes(seed)
        s1 = np.concatenate([x1, -x1])
        s2 = np.concatenate([x2, -x2])
        m1 = np.concatenate([w1, w1])
        m2 = np.concatenate([w2, w2])
        X1, X2 = np.meshgrid(s1, s2, indexing="ij")
        M = np.outer(m1, m2)
        return np.column_stack([X1.ravel(), X2.ravel()]), M.ravel()


def _log_edges(lo, hi, per_octave):
    k = max(1, int(np.ceil(per_octave * np.log2(hi / lo))))
    return np.geomspace(lo, hi, k + 1)


@lru_cache(maxsize=256)
def _tail_ok(params, x1, x2, xi, tol):
    return truncation_tail(params, x1, x2, xi) < tol


def frequency_grid(grid, params, xi_max=None, cells_per_octave=8, axis_depth=None,
                   jitter=True, oversample=4.0, band_limit=False, tail_tol=0.005):
    """Default frequency grid for a spatial grid.

    The truncation box is [-xi_max, xi_max]^2 per axis. By default xi_max
    is `oversample` times the grid Nyquist frequency, doubled until the
    share of Var X_x beyond the box at the grid's farthest corner is below
    `tail_tol`. With `band_limit`, xi_max is the Nyquist frequency of each
    axis (no content that would alias on the grid).

    Near the axes the cells reach down to xi_ref 2^-axis_depth with
    xi_ref = 1 / max|x|; when `axis_depth` is None it is chosen so the
    dropped strips carry about 1e-3 of the variance (at least 8 levels).
    """
    nyq = (np.pi / grid.dx1, np.pi / grid.dx2)
    if band_limit:
        top = nyq
    elif xi_max is not None:
        top = (float(xi_max), float(xi_max))
    else:
        xi = oversample * max(nyq)
        far = max(abs(grid.x1_min), abs(grid.x1_max)), max(abs(grid.x2_min), abs(grid.x2_max))
        for _ in range(20):
            if _tail_ok(params, far[0], far[1], xi, tail_tol):
                break
            xi *= 2.0
        top = (xi, xi)
    if axis_depth is None:
        a = 2.0 * params.h_minus + 1.0
        axis_depth = int(min(40, max(8, np.ceil(10.0 / (3.0 - a)))))
    ref = 1.0 / grid.max_abs()
    lo = ref * 2.0 ** -axis_depth
    e1 = _log_edges(lo, top[0], cells_per_octave)
    e2 = _log_edges(lo, top[1], cells_per_octave)
    return FrequencyGrid(e1, e2, jitter, (float(top[0]), float(top[1])), int(axis_depth))


# ---------------------------------------------------------------------------
# synthesis paths

def spectral_synthesize(params, grid, freq, seed):
    """Realization X(x) = sum_c K_x(xi_c) W_c with W_{-c} = conj(W_c).

    Cells with xi1 > 0 carry independent complex Gaussians W_c with
    E|W_c|^2 equal to the cell measure; their mirror images contribute the
    complex conjugate, so the sum is assembled as S + conj(S) and is real
    by construction.
    """
    seed = int(seed)
    (u1, w1), (u2, w2) = freq.nodes(seed if freq.jitter else None)
    N1, N2 = u1.size, u2.size
    z = rng.standard_normal(rng.derive_stream(seed, 0), 4 * N1 * N2).reshape(4, N1, N2)
    m = np.sqrt(0.5 * np.outer(w1, w2))
    phi = (np.minimum.outer(u1, u2) ** (params.h_minus + 0.5)
           * np.maximum.outer(u1, u2) ** (params.h_plus + 0.5))
    A_pp = m * (z[0] + 1j * z[1]) / phi      # cells (+u1, +u2)
    A_pm = m * (z[2] + 1j * z[3]) / phi      # cells (+u1, -u2)
    c1, c2 = grid.coords()
    E1 = np.expm1(1j * np.outer(c1, u1))
    E2 = np.expm1(1j * np.outer(c2, u2))
    S = (E1 @ A_pp) @ E2.T + (E1 @ A_pm) @ E2.conj().T
    values = 2.0 * S.real
    return FieldRealization(values, grid, params, seed, "spectral")


def cholesky_synthesize(params, grid, seed, quad=DEFAULT_QUAD, factor=None):
    """Exact sampling X = L Z from the quadrature covariance over the grid.

    Grid points with exactly zero variance (on a coordinate axis) are kept
    at 0 and left out of the factorization. A precomputed `factor` from
    cholesky_factor can be passed to reuse the factorization.
    """
    if factor is None:
        factor = cholesky_factor(params, grid, quad)
    L, keep = factor
    z = rng.standard_normal(rng.derive_stream(int(seed), 0), L.shape[0])
    values = np.zeros(grid.n1 * grid.n2)
    values[keep] = L @ z
    return FieldRealization(values.reshape(grid.shape), grid, params, int(seed), "cholesky")


def cholesky_factor(params, grid, quad=DEFAULT_QUAD):
    n = grid.n1 * grid.n2
    if n > CHOLESKY_MAX_POINTS:
        raise DomainError(f"cholesky path limited to {CHOLESKY_MAX_POINTS} grid points, got {n}")
    c1, c2 = grid.coords()
    G = covariance_matrix(params, c1, c2, quad)
    keep = np.flatnonzero(np.diag(G) > 0.0)
    G = G[np.ix_(keep, keep)]
    tr = float(np.trace(G))
    lam = 0.0
    while True:
        try:
            L = np.linalg.cholesky(G + lam * np.eye(G.shape[0]) if lam else G)
            return L, keep
        except np.linalg.LinAlgError:
            lam = 1e-12 * tr if lam == 0.0 else lam * 10.0
            if lam > 1e-6 * tr:
                raise NotPositiveDefiniteError(
                    "covariance Gram matrix needs jitter above 1e-6 * trace; "
                    "tighten the quadrature tolerance") from None


def simulate_ensemble(params, grid, seed, count, method="spectral", freq=None,
                      quad=DEFAULT_QUAD, threads=None, start=0):
    """Realizations i = start..start+count-1 with seeds derive_stream(seed, i)."""
    if method not in METHODS:
        raise DomainError(f"unknown synthesis method {method!r}")
    seeds = [rng.derive_stream(seed, i) for i in range(start, start + count)]
    if method == "cholesky":
        fac = cholesky_factor(params, grid, quad)
        return pmap(lambda s: cholesky_synthesize(params, grid, s, quad, fac), seeds, threads)
    if freq is None:
        freq = frequency_grid(grid, params)
    return pmap(lambda s: spectral_synthesize(params, grid, freq, s), seeds, threads)

"""Rectangular increments, their ensemble moments and Hoelder-ratio probes."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EnsembleMismatchError, GridIndexError


@dataclass(frozen=True)
class RatioStatistic:
    gamma: float
    sup_ratio: float
    argmax: tuple        # ((i1, i2), (d1, d2)) in grid indices
    resolution: int


def _values(field):
    return field.values if hasattr(field, "values") else np.asarray(field, dtype=float)


def rect_increment(field, x_idx, h_idx):
    """X(x+h1, x2+h2) - X(x+h1, x2) - X(x1, x2+h2) + X(x1, x2) on grid indices."""
    v = _values(field)
    i, j = int(x_idx[0]), int(x_idx[1])
    di, dj = int(h_idx[0]), int(h_idx[1])
    n1, n2 = v.shape
    for a, n in ((i, n1), (i + di, n1), (j, n2), (j + dj, n2)):
        if not 0 <= a < n:
            raise GridIndexError(f"corner index {a} outside grid axis of length {n}")
    return float(v[i + di, j + dj] - v[i + di, j] - v[i, j + dj] + v[i, j])


def increment_field(values, d1, d2):
    """All rectangular increments with positive index steps (d1, d2), as an array."""
    v = np.asarray(values, dtype=float)
    return v[d1:, d2:] - v[d1:, :v.shape[1] - d2] - v[:v.shape[0] - d1, d2:] + v[:v.shape[0] - d1, :v.shape[1] - d2]


def check_ensemble(realizations, minimum=1):
    if len(realizations) < minimum:
        raise EnsembleMismatchError(f"need at least {minimum} realizations, got {len(realizations)}")
    g, p = realizations[0].grid, realizations[0].params
    for r in realizations[1:]:
        if r.grid != g or r.params != p:
            raise EnsembleMismatchError("realizations differ in grid or parameters")


def empirical_increment_moment(realizations, h_idx, base_points, minimum=30):
    """Per base point: (mean of squared increment, standard error) across the ensemble."""
    check_ensemble(realizations, minimum)
    out = []
    for x in base_points:
        d = np.array([rect_increment(r, x, h_idx) for r in realizations]) ** 2
        out.append((float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size))))
    return out


def _dyadic_index_step(extent, n, p):
    # grid steps corresponding to the physical step 2^-p, or None
    steps = n * 2.0**-p / extent
    k = int(round(steps))
    if k < 1 or abs(steps - k) > 1e-9 * max(1.0, steps):
        return None
    return k


def holder_ratio(field, gamma, alpha, depth):
    """sup |Delta X| / (max(|h|)^(1-alpha) min(|h|)^(1+alpha))^gamma over dyadic probes.

    Base points are the dyadic lattice of resolution 2^-depth (taken from
    the grid), steps are (+-2^-p1, +-2^-p2) with 1 <= p1, p2 <= depth,
    restricted to rectangles inside the grid. Negative steps give the same
    rectangles as positive steps from a shifted base point, so the sup over
    all sign combinations equals the sup over positive steps. Ties resolve
    to the lexicographically smallest (x_idx, h_idx).
    """
    v = _values(field)
    grid = getattr(field, "grid", None)
    n1, n2 = v.shape
    if depth < 1 or depth > np.log2(min(n1, n2)) + 1e-12:
        raise DomainError(f"depth {depth} exceeds log2 of the grid size {min(n1, n2)}")
    ext1 = (grid.x1_max - grid.x1_min) if grid is not None else 1.0
    ext2 = (grid.x2_max - grid.x2_min) if grid is not None else 1.0
    # lattice stride in grid points for resolution 2^-depth
    s1 = _dyadic_index_step(ext1, n1, depth)
    s2 = _dyadic_index_step(ext2, n2, depth)
    if s1 is None or s2 is None:
        raise DomainError("grid spacing does not divide the dyadic resolution 2^-depth")
    lat = v[::s1, ::s2]
    best = (-1.0, None)
    for p1 in range(1, depth + 1):
        d1 = _dyadic_index_step(ext1, n1, p1)
        if d1 is None or d1 >= n1:
            continue
        for p2 in range(1, depth + 1):
            d2 = _dyadic_index_step(ext2, n2, p2)
            if d2 is None or d2 >= n2:
                continue
            h1, h2 = 2.0**-p1, 2.0**-p2
            den = (max(h1, h2) ** (1.0 - alpha) * min(h1, h2) ** (1.0 + alpha)) ** gamma
            inc = np.abs(increment_field(lat, d1 // s1, d2 // s2)) / den
            if inc.size == 0:
                continue
            k = int(np.argmax(inc))
            val = float(inc.flat[k])
            i, j = np.unravel_index(k, inc.shape)
            cand = ((int(i) * s1, int(j) * s2), (d1, d2))
            if val > best[0] or (val == best[0] and best[1] is not None and cand < best[1]):
                best = (val, cand)
    if best[1] is None:
        raise DomainError("no dyadic probe fits inside the grid")
    return RatioStatistic(float(gamma), best[0], best[1], int(depth))

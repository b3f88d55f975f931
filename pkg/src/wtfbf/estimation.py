"""(H, alpha) estimation by planar log-log regression of coefficient variances.

Off the near-diagonal (|j1 - j2| > 1) the coefficient variance is an
exact power law, log2 V(j) = -2 H+ max(j) - 2 H- min(j) + b, so an
ordinary least-squares fit on the design (max, min, 1) recovers both
exponents.
"""
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DomainError, EnsembleMismatchError, EstimationError
from .hyperbolic import member_level_means
from .parallel import pmap

MIN_LEVELS = 6


@dataclass(frozen=True)
class ScalingFit:
    h_plus_hat: float
    h_minus_hat: float
    intercept: float
    residual_rms: float
    levels_used: tuple
    residuals: tuple = ()
    std_errors: dict = field(default_factory=dict)   # level -> SE of mean |c|^2, if known


@dataclass(frozen=True)
class Recovered:
    hurst: float
    alpha: float
    hurst_clamped: bool = False
    alpha_clamped: bool = False

    def __iter__(self):
        return iter((self.hurst, self.alpha))


def _usable(jb, v):
    j1, j2 = jb
    return abs(j1 - j2) > 1 and min(j1, j2) >= 0 and v > 0 and np.isfinite(v)


def fit_scaling(level_moments, weighted=False):
    """Planar fit of log2 mean|c|^2 against (max(j), min(j), 1).

    `level_moments` maps level pairs to either mean |c|^2 or (mean, SE).
    Only pairs with |j1 - j2| > 1 and nonnegative levels enter. With
    `weighted`, each row is weighted by mean / SE (the inverse standard
    error of log2 mean, up to a constant).
    """
    means, ses = {}, {}
    for jb, v in level_moments.items():
        if isinstance(v, tuple):
            means[tuple(jb)], ses[tuple(jb)] = float(v[0]), float(v[1])
        else:
            means[tuple(jb)] = float(v)
    used = sorted(jb for jb, v in means.items() if _usable(jb, v))
    if len(used) < MIN_LEVELS:
        raise EstimationError(f"need at least {MIN_LEVELS} level pairs with |j1-j2|>1, got {len(used)}")
    mx = np.array([max(jb) for jb in used], dtype=float)
    mn = np.array([min(jb) for jb in used], dtype=float)
    if np.all(mx == mx[0]) or np.all(mn == mn[0]):
        raise EstimationError("degenerate design: all max levels or all min levels equal")
    X = np.column_stack([mx, mn, np.ones_like(mx)])
    y = np.log2([means[jb] for jb in used])
    w = np.ones_like(y)
    if weighted:
        if any(ses.get(jb, 0.0) <= 0 for jb in used):
            raise EstimationError("weighted fit needs positive standard errors for every level")
        w = np.array([means[jb] / ses[jb] for jb in used])
    beta, *_ = np.linalg.lstsq(X * w[:, None], y * w, rcond=None)
    res = y - X @ beta
    return ScalingFit(float(-beta[0] / 2.0), float(-beta[1] / 2.0), float(beta[2]),
                      float(np.sqrt(np.mean(res ** 2))), tuple(used), tuple(map(float, res)),
                      {jb: ses[jb] for jb in used if jb in ses})


def recover_params(fit):
    """H = (H+ + H-)/2, alpha = (H+ - H-)/(H+ + H-), clamped into the parameter box."""
    hp, hm = fit.h_plus_hat, fit.h_minus_hat
    tot = hp + hm
    if not tot > 0:
        raise EstimationError(f"H+ + H- must be positive, got {tot}")
    h = tot / 2.0
    a = (hp - hm) / tot
    eps = 1e-9
    hc = min(max(h, eps), 1.0 - eps)
    ac = min(max(a, 0.0), 1.0)
    return Recovered(hc, ac, hc != h, ac != a)


def forward(hurst, alpha):
    return (1.0 + alpha) * hurst, (1.0 - alpha) * hurst


# ---------------------------------------------------------------------------
# ensembles

def ensemble_means(ensemble, minimum=30):
    """Per-member interior level means, as a (members x levels) array and the level list."""
    if len(ensemble) < minimum:
        raise EnsembleMismatchError(f"need at least {minimum} members, got {len(ensemble)}")
    per = [member_level_means(c) for c in ensemble]
    levels = sorted(per[0])
    for p in per[1:]:
        if sorted(p) != levels:
            raise EnsembleMismatchError("members have different level sets")
    return np.array([[p[jb] for jb in levels] for p in per]), levels


def estimate(member_means, levels, weighted=False):
    m = member_means.mean(axis=0)
    n = member_means.shape[0]
    se = member_means.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(m)
    fit = fit_scaling({jb: (float(a), float(b)) for jb, a, b in zip(levels, m, se)}, weighted)
    return fit, recover_params(fit)


@dataclass(frozen=True)
class BootstrapResult:
    hurst: float
    alpha: float
    hurst_ci: tuple
    alpha_ci: tuple
    confidence: float
    resamples: int
    fit: ScalingFit


def bootstrap_ci(ensemble, resamples=200, confidence=0.9, seed=0, threads=None,
                 weighted=False, minimum=30, member_means=None):
    """Percentile bootstrap intervals for (H, alpha) over ensemble members.

    Resample b draws member indices from stream derive_stream(seed, b), so
    the result does not depend on thread count or scheduling.
    `member_means` (from ensemble_means) can replace `ensemble`.
    """
    if member_means is None:
        member_means, levels = ensemble_means(ensemble, minimum)
    else:
        member_means, levels = member_means
        if member_means.shape[0] < minimum:
            raise EnsembleMismatchError(f"need at least {minimum} members, got {member_means.shape[0]}")
    if resamples < 200:
        raise DomainError("bootstrap needs at least 200 resamples")
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0, 1)")
    fit, point = estimate(member_means, levels, weighted)
    n = member_means.shape[0]

    def one(b):
        idx = rng.integers(rng.derive_stream(seed, b), n, n)
        try:
            _, r = estimate(member_means[idx], levels, weighted)
        except EstimationError:
            return (np.nan, np.nan)
        return (r.hurst, r.alpha)

    draws = np.array(pmap(one, range(resamples), threads))
    lo_q, hi_q = 0.5 * (1.0 - confidence), 0.5 * (1.0 + confidence)
    ci = [tuple(float(x) for x in np.nanquantile(draws[:, i], [lo_q, hi_q])) for i in range(2)]
    return BootstrapResult(point.hurst, point.alpha, ci[0], ci[1], confidence, resamples, fit)

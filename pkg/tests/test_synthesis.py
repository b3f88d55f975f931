import numpy as np
import pytest
from hypothesis import given, strategies as st

from wtfbf.errors import DomainError
from wtfbf.increments import empirical_increment_moment
from wtfbf.model import FieldParams, field_variance, increment_variance
from wtfbf.synthesis import (FieldRealization, GridSpec, cholesky_factor, cholesky_synthesize,
                             frequency_grid, simulate_ensemble, spectral_synthesize)

P = FieldParams(0.5, 0.5)


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec(1, 4)
    with pytest.raises(DomainError):
        GridSpec.square(8, 0.0)
    with pytest.raises(DomainError):
        GridSpec(4, 4, 0, np.inf)
    g = GridSpec.square(8, 2.0, -1.0)
    c1, _ = g.coords()
    assert c1[0] == -1.0 and np.isclose(c1[-1], 0.75) and g.dx1 == 0.25


def test_realization_validation():
    g = GridSpec.square(4)
    with pytest.raises(DomainError):
        FieldRealization(np.zeros((4, 5)), g, P)
    with pytest.raises(DomainError):
        FieldRealization(np.full((4, 4), np.nan), g, P)


def test_frequency_grid_structure():
    g = GridSpec.square(32)
    fq = frequency_grid(g, P)
    for e in (fq.edges1, fq.edges2):
        assert e[0] > 0 and np.all(np.diff(e) > 0)
    centers, meas = fq.all_cells(seed=3)
    assert centers.shape[0] == fq.size == meas.size
    assert np.all(centers != 0)                       # no cell touches an axis
    # symmetric under xi -> -xi: every center has its mirror image
    s = {tuple(np.round(c, 12)) for c in centers}
    assert all(tuple(np.round(-c, 12)) in s for c in centers[::97])
    # jittered nodes stay inside their cells
    (x1, _), _ = fq.nodes(seed=11)
    assert np.all((x1 > fq.edges1[:-1]) & (x1 < fq.edges1[1:]))
    assert frequency_grid(g, P, band_limit=True).xi_max[0] == pytest.approx(np.pi * 32)


def test_spectral_axis_zero_and_determinism():
    g = GridSpec.square(16, 2.0, -1.0)        # contains the axes x = 0
    fq = frequency_grid(g, P)
    a = spectral_synthesize(P, g, fq, 7)
    b = spectral_synthesize(P, g, fq, 7)
    assert np.array_equal(a.values, b.values)
    i0 = 8
    assert np.all(a.values[i0, :] == 0) and np.all(a.values[:, i0] == 0)
    assert not np.array_equal(a.values, spectral_synthesize(P, g, fq, 8).values)


def test_spectral_sum_is_real():
    # assemble the full complex sum over all cells and check the imaginary residue
    g = GridSpec.square(8)
    fq = frequency_grid(g, P, cells_per_octave=2)
    c1, c2 = g.coords()
    centers, meas = fq.all_cells(seed=None)
    (u1, _), (u2, _) = fq.nodes(None)
    N1, N2 = u1.size, u2.size
    rs = np.random.default_rng(0)
    W = np.zeros((2 * N1, 2 * N2), complex)
    Wp = (rs.standard_normal((N1, 2 * N2)) + 1j * rs.standard_normal((N1, 2 * N2)))
    W[:N1] = Wp
    W[N1:, :N2] = np.conj(Wp[:, N2:])
    W[N1:, N2:] = np.conj(Wp[:, :N2])
    from wtfbf.model import kernel
    K = kernel(P, c1[:, None, None], c2[None, :, None], centers[:, 0], centers[:, 1])
    S = K @ (W.ravel() * np.sqrt(meas))
    assert np.abs(S.imag).max() < 1e-10 * np.abs(S).max()


def test_cholesky_axis_and_determinism():
    g = GridSpec.square(8, 1.0)               # first row/column sit on the axes
    a = cholesky_synthesize(P, g, 42)
    assert np.array_equal(a.values, cholesky_synthesize(P, g, 42).values)
    assert np.all(a.values[0, :] == 0) and np.all(a.values[:, 0] == 0)
    L, keep = cholesky_factor(P, g)
    assert keep.size == 49


def test_cholesky_size_limit():
    with pytest.raises(DomainError):
        cholesky_synthesize(P, GridSpec.square(65), 1)


def test_ensemble_order_independent_of_threads():
    g = GridSpec.square(16)
    a = simulate_ensemble(P, g, 5, 6, threads=1)
    b = simulate_ensemble(P, g, 5, 6, threads=3)
    c = simulate_ensemble(P, g, 5, 3, threads=2, start=3)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a[3:], c))


def test_spectral_increment_variance_and_stationarity():
    g = GridSpec.square(32, 1.0)
    ens = simulate_ensemble(P, g, 11, 600)
    want = increment_variance(P, 0.125, 0.125)
    pts = [(4, 4), (12, 20), (20, 8), (23, 23)]
    est = empirical_increment_moment(ens, (4, 4), pts)
    for m, se in est:
        assert abs(m - want) <= 3 * se + 0.02 * want
    ms = np.array(est)
    for i in range(4):
        for j in range(i):
            assert abs(ms[i, 0] - ms[j, 0]) <= 3 * np.hypot(ms[i, 1], ms[j, 1])


def test_spectral_self_similarity():
    # the variance field on [0,2)^2 is 2^(4H) times the one on [0,1)^2
    h = 0.3
    p = FieldParams(0.5, h)
    g1, g2 = GridSpec.square(8, 1.0), GridSpec.square(8, 2.0)
    e1 = np.array([f.values[6, 5] for f in simulate_ensemble(p, g1, 1, 800)])
    e2 = np.array([f.values[6, 5] for f in simulate_ensemble(p, g2, 2, 800)])
    v1, v2 = (e1 ** 2).mean(), (e2 ** 2).mean()
    se = np.hypot(2 ** (4 * h) * (e1 ** 2).std() / np.sqrt(800), (e2 ** 2).std() / np.sqrt(800))
    assert abs(v2 - 2 ** (4 * h) * v1) <= 3 * se
    assert abs(v1 - field_variance(p, 0.75, 0.625)) <= 3 * (e1 ** 2).std() / np.sqrt(800) + 0.02 * v1


@given(st.integers(0, 2**64 - 1))
def test_cholesky_realization_finite(seed):
    f = cholesky_synthesize(P, GridSpec.square(4), seed)
    assert np.all(np.isfinite(f.values)) and f.seed == seed and f.method == "cholesky"

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wtfbf.errors import DomainError, EnsembleMismatchError, GridIndexError
from wtfbf.increments import (empirical_increment_moment, holder_ratio, increment_field,
                              rect_increment)
from wtfbf.model import FieldParams
from wtfbf.synthesis import FieldRealization, GridSpec, frequency_grid, simulate_ensemble

P = FieldParams(0.5, 0.5)
G = GridSpec(4, 4, 0, 4, 0, 4)          # integer coordinates 0..3


def field(fn, grid=G):
    c1, c2 = grid.coords()
    return FieldRealization(fn(c1[:, None], c2[None, :]) + 0 * c1[:, None] * c2[None, :], grid, P)


def test_rect_increment_examples():
    assert rect_increment(field(lambda x, y: x * y), (0, 0), (1, 1)) == 1
    assert rect_increment(field(lambda x, y: x ** 2 * y), (1, 1), (1, 1)) == 3
    f = field(lambda x, y: np.sin(x) + y ** 3)
    assert all(abs(rect_increment(f, (i, j), (1, 2))) < 1e-12 for i in range(3) for j in range(2))
    with pytest.raises(GridIndexError):
        rect_increment(f, (3, 0), (1, 1))
    with pytest.raises(GridIndexError):
        rect_increment(f, (-1, 0), (1, 1))


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**32))
def test_rect_increment_bilinear(a, b, seed):
    rs = np.random.default_rng(seed)
    F, H = rs.standard_normal((2, 4, 4))
    fa = FieldRealization(a * F + b * H, G, P)
    want = a * rect_increment(F, (0, 1), (2, 1)) + b * rect_increment(H, (0, 1), (2, 1))
    assert np.isclose(rect_increment(fa, (0, 1), (2, 1)), want, atol=1e-10)


def test_increment_field_matches_pointwise():
    v = np.random.default_rng(0).standard_normal((6, 7))
    d = increment_field(v, 2, 3)
    assert d.shape == (4, 4)
    assert np.isclose(d[1, 2], rect_increment(v, (1, 2), (2, 3)))


def test_empirical_moment_zero_and_mismatch():
    z = [FieldRealization(np.zeros((4, 4)), G, P) for _ in range(30)]
    assert empirical_increment_moment(z, (1, 1), [(0, 0), (1, 2)]) == [(0.0, 0.0), (0.0, 0.0)]
    with pytest.raises(EnsembleMismatchError):
        empirical_increment_moment(z[:10], (1, 1), [(0, 0)])
    other = z[:29] + [FieldRealization(np.zeros((4, 4)), G, FieldParams(0.1, 0.5))]
    with pytest.raises(EnsembleMismatchError):
        empirical_increment_moment(other, (1, 1), [(0, 0)])


def test_holder_ratio_examples():
    g = GridSpec.square(16, 1.0)
    f = field(lambda x, y: x * y, g)
    r = holder_ratio(f, 1.0, 0.0, 4)
    assert np.isclose(r.sup_ratio, 1.0)
    r0 = holder_ratio(f, 0.0, 0.0, 4)
    assert np.isclose(r0.sup_ratio, 0.25) and r0.resolution == 4     # largest probe is 1/2 x 1/2
    (i, j), (d1, d2) = r0.argmax
    assert 0 <= i + d1 < 16 and 0 <= j + d2 < 16
    with pytest.raises(DomainError):
        holder_ratio(f, 1.0, 0.0, 5)


def test_holder_ratio_monotone_and_scaling():
    g = GridSpec.square(64, 1.0)
    f = simulate_ensemble(P, g, 3, 1)[0]
    vals = [holder_ratio(f, gm, 0.5, 6).sup_ratio for gm in (0.2, 0.4, 0.6)]
    assert vals[0] <= vals[1] <= vals[2]
    r = holder_ratio(f, 0.4, 0.5, 6)
    r3 = holder_ratio(f.with_values(-3.0 * f.values), 0.4, 0.5, 6)
    assert np.isclose(r3.sup_ratio, 3.0 * r.sup_ratio, rtol=1e-14)
    assert r3.argmax == r.argmax


def test_holder_ratio_tie_break_lexicographic():
    g = GridSpec.square(8, 1.0)
    f = FieldRealization(np.zeros((8, 8)), g, P)
    r = holder_ratio(f, 0.5, 0.5, 3)
    assert r.sup_ratio == 0.0 and r.argmax == ((0, 0), (1, 1))


def test_holder_ratio_growth_direction():
    # the irregular side grows with depth, the regular side stays flat
    p = FieldParams(0.5, 0.5)
    g = GridSpec.square(256, 1.0)
    ens = simulate_ensemble(p, g, 17, 8, freq=frequency_grid(g, p))
    lo = [holder_ratio(f, 0.45, 0.5, 8).sup_ratio / holder_ratio(f, 0.45, 0.5, 5).sup_ratio for f in ens]
    hi = [holder_ratio(f, 0.55, 0.5, 8).sup_ratio / holder_ratio(f, 0.55, 0.5, 5).sup_ratio for f in ens]
    assert np.median(hi) > 1.0
    assert np.median(lo) < 1.5

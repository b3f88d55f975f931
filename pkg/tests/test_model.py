import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from wtfbf.errors import DomainError, QuadratureError
from wtfbf.model import (FieldParams, QuadratureSpec, coeff_constant_c1, coeff_variance_exact,
                         covariance, covariance_matrix, field_variance, increment_variance,
                         kernel, ring_increment_variance, spectral_density_root)

ALPHA = st.floats(0.0, 1.0)
HURST = st.floats(0.05, 0.95)
STEP = st.floats(1e-3, 10.0)
FREQ = st.floats(1e-3, 1e3).flatmap(lambda a: st.sampled_from([a, -a]))


@pytest.mark.parametrize("a,h", [(-0.1, 0.5), (1.1, 0.5), (0.5, 0.0), (0.5, 1.0), (np.nan, 0.5)])
def test_params_validation(a, h):
    with pytest.raises(DomainError):
        FieldParams(a, h)


@given(ALPHA, HURST)
def test_params_derived(a, h):
    p = FieldParams(a, h)
    assert p.h_plus == (1 + a) * h and p.h_minus == (1 - a) * h
    assert 0 <= p.h_minus <= h <= p.h_plus < 2
    assert abs(p.h_plus + p.h_minus - 2 * h) < 1e-15


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


def test_density_root_examples():
    assert spectral_density_root(FieldParams(0, 0.5), 1, 1) == 1.0
    assert abs(spectral_density_root(FieldParams(0.5, 0.5), 2, 4) - 2 ** 3.25) < 1e-12
    with pytest.raises(DomainError):
        spectral_density_root(FieldParams(0.5, 0.5), 0.0, 1.0)


@given(ALPHA, HURST, FREQ, FREQ, st.floats(0.1, 10))
def test_density_root_symmetry_homogeneity(a, h, x, y, s):
    p = FieldParams(a, h)
    v = spectral_density_root(p, x, y)
    assert v > 0
    assert v == spectral_density_root(p, y, x) == spectral_density_root(p, -x, y)
    assert np.isclose(spectral_density_root(p, s * x, s * y), s ** (2 * h + 1) * v, rtol=1e-10)


def test_kernel_examples():
    p = FieldParams(0, 0.5)
    assert abs(abs(kernel(p, 1, 1, np.pi, np.pi)) ** 2 - 16 / np.pi ** 4) < 1e-12
    assert kernel(p, 0.0, 0.7, 1.3, 2.1) == 0
    with pytest.raises(DomainError):
        kernel(p, 1, 1, 0.0, 1.0)


@given(ALPHA, HURST, st.floats(-5, 5), st.floats(-5, 5), FREQ, FREQ)
def test_kernel_conjugate_symmetry(a, h, x1, x2, u, v):
    p = FieldParams(a, h)
    assert np.isclose(kernel(p, x1, x2, -u, -v), np.conj(kernel(p, x1, x2, u, v)),
                      rtol=1e-12, atol=1e-300)


def test_one_dimensional_factor():
    # int 4 sin^2(u/2) / u^2 du = 2 pi, so the alpha = 0, H = 1/2 value is 4 pi^2
    f = lambda u: 4 * np.sin(u / 2) ** 2 / u ** 2
    # integrate over [0, 200 pi] then add the tail, whose mean integrand is 2 / u^2
    head, _ = integrate.quad(f, 0, 200 * np.pi, limit=1000)
    val = 2 * (head + 2 / (200 * np.pi))
    assert abs(val - 2 * np.pi) < 1e-6
    v = increment_variance(FieldParams(0, 0.5), 1, 1)
    assert abs(v - 4 * np.pi ** 2) / (4 * np.pi ** 2) < 1e-6
    assert abs(field_variance(FieldParams(0, 0.5), 1, 1) - v) < 1e-12


@pytest.mark.parametrize("h", [0.2, 0.7])
def test_fbs_product_formula(h):
    # at alpha = 0 the field is a fractional Brownian sheet: V = prod c(h) |h_i|^(2H)
    p = FieldParams(0.0, h)
    c = increment_variance(p, 1, 1)
    assert np.isclose(increment_variance(p, 0.3, 2.0), c * (0.6) ** (2 * h), rtol=1e-6)


def test_closed_form_vs_2d_route():
    for a, h in [(0.0, 0.3), (0.5, 0.5), (1.0, 0.7)]:
        p = FieldParams(a, h)
        for hh in [(1.0, 1.0), (0.1, 0.9)]:
            assert np.isclose(increment_variance(p, *hh), ring_increment_variance(p, *hh),
                              rtol=1e-5)


@given(ALPHA, HURST, STEP, STEP, st.sampled_from([0.5, 2.0, 3.0]))
def test_increment_scaling(a, h, h1, h2, s):
    p = FieldParams(a, h)
    v = increment_variance(p, h1, h2)
    assert v > 0
    assert np.isclose(increment_variance(p, s * h1, s * h2), s ** (4 * h) * v, rtol=1e-6)
    assert v == increment_variance(p, -h1, h2) == increment_variance(p, h1, -h2)
    assert np.isclose(v, increment_variance(p, h2, h1), rtol=1e-12)


def test_extreme_step_ratio_rejected():
    with pytest.raises(DomainError):
        increment_variance(FieldParams(0.5, 0.5), 1.0, 1e-309)


def test_zero_steps_and_axes():
    p = FieldParams(0.4, 0.6)
    assert increment_variance(p, 0.0, 1.0) == 0.0
    assert field_variance(p, 0.0, 2.0) == 0.0
    assert covariance(p, (1.0, 1.0), (0.0, 3.0)) == 0.0


def test_vectorized_matches_scalar():
    p = FieldParams(0.3, 0.4)
    h = np.array([0.1, 0.5, 2.0])
    vec = increment_variance(p, h, h[::-1])
    assert np.allclose(vec, [increment_variance(p, a, b) for a, b in zip(h, h[::-1])], rtol=0)


COORD = st.one_of(st.just(0.0), st.floats(1e-6, 2.0), st.floats(-2.0, -1e-6))


@given(ALPHA, HURST, st.tuples(COORD, COORD), st.tuples(COORD, COORD))
def test_covariance_symmetry(a, h, x, y):
    p = FieldParams(a, h)
    assert np.isclose(covariance(p, x, y), covariance(p, y, x), rtol=1e-12, atol=1e-14)
    assert np.isclose(covariance(p, x, x), field_variance(p, *x), rtol=1e-9, atol=1e-14)


def test_gram_matrix_psd():
    p = FieldParams(0.5, 0.5)
    c = np.linspace(0.25, 1.0, 4)
    G = covariance_matrix(p, c, c)
    assert np.allclose(G, G.T)
    w = np.linalg.eigvalsh(G)
    assert w.min() >= -1e-8 * np.trace(G)
    assert np.isclose(G[5, 10], covariance(p, (c[1], c[1]), (c[2], c[2])), rtol=1e-12)


def test_variance_self_similarity():
    p = FieldParams(0.5, 0.3)
    v = field_variance(p, 0.7, 0.4)
    for s in (0.5, 2.0):
        assert np.isclose(field_variance(p, s * 0.7, s * 0.4), s ** (4 * 0.3) * v, rtol=1e-6)


def test_increment_bound_ratio_bounded():
    p = FieldParams(0.5, 0.5)
    rs = np.random.default_rng(1)
    h = rs.uniform(1e-3, 1, (200, 2))
    mx, mn = h.max(1), h.min(1)
    r = increment_variance(p, h[:, 0], h[:, 1]) / (mx ** (1 - p.alpha) * mn ** (1 + p.alpha)) ** (2 * p.hurst)
    assert np.all(np.isfinite(r)) and r.max() / r.min() < 50
    n = np.arange(1, 30)
    d = increment_variance(p, 2.0 ** -n, 2.0 ** -n)
    slope, icpt = np.polyfit(n, np.log2(d), 1)
    assert abs(slope + 4 * p.hurst) < 1e-3
    assert np.abs(np.log2(d) - (slope * n + icpt)).max() < 1e-3


def test_quadrature_error_raised():
    with pytest.raises(QuadratureError) as e:
        increment_variance(FieldParams(0.5, 0.5), 1, 1, QuadratureSpec(rel_tol=1e-300, abs_tol=1e-300))
    assert e.value.error is not None


@pytest.mark.parametrize("a,h", [(0.0, 0.3), (0.5, 0.5), (1.0, 0.7)])
def test_coeff_variance_product_law(a, h):
    p = FieldParams(a, h)
    c1 = coeff_constant_c1(p)
    for j1, j2 in [(0, 2), (5, 2), (1, 4), (6, 3)]:
        want = c1 * 2.0 ** (-2 * (max(j1, j2) * p.h_plus + min(j1, j2) * p.h_minus))
        assert np.isclose(coeff_variance_exact(p, j1, j2), want, rtol=1e-6)


def test_coeff_variance_diagonal_and_monotone():
    p = FieldParams(0.5, 0.6)
    c2 = coeff_variance_exact(p, 0, 0)
    for j in range(4):
        assert np.isclose(coeff_variance_exact(p, j, j), c2 * 2.0 ** (-4 * j * p.hurst), rtol=1e-6)
    assert coeff_variance_exact(p, 3, 1) < coeff_variance_exact(p, 1, 1)
    assert coeff_variance_exact(p, 1, 3) < coeff_variance_exact(p, 1, 1)
    assert np.isclose(coeff_variance_exact(p, 1, 2), coeff_variance_exact(p, 2, 1), rtol=1e-9)
    with pytest.raises(DomainError):
        coeff_variance_exact(p, -1, 2)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from flowlab import geometry as geo
from flowlab.errors import InvalidMetricError


def conformal(n, u_fn=lambda x: 0.1 * np.cos(x)):
    grid = geo.GridSpec(n)
    return geo.DiagonalMetric.conformal(grid, u_fn(grid.x))


def generic(n):
    grid = geo.GridSpec(n)
    x = grid.x
    return geo.DiagonalMetric(grid, np.exp(0.2 * np.cos(x)), np.exp(0.1 * np.sin(2 * x)))


def ratio(err_fn, n=64):
    return err_fn(n) / err_fn(2 * n)


# -- grid and metric validation ---------------------------------------------

@pytest.mark.parametrize("n", [8, 15, 17])
def test_grid_rejects_small_or_odd(n):
    with pytest.raises(ValueError):
        geo.GridSpec(n)


def test_metric_rejects_nonpositive_and_nonfinite():
    grid = geo.GridSpec(16)
    with pytest.raises(InvalidMetricError):
        geo.DiagonalMetric(grid, np.zeros(16), np.ones(16))
    with pytest.raises(InvalidMetricError):
        geo.DiagonalMetric(grid, np.full(16, np.nan), np.ones(16))
    with pytest.raises(InvalidMetricError):
        geo.DiagonalMetric(grid, np.ones(15), np.ones(16))
    with pytest.raises(InvalidMetricError):
        geo.DiagonalMetric(grid, np.full(16, 1e-13), np.ones(16))


# -- curvature ------------------------------------------------------------------

def test_flat_and_constant_metrics_have_zero_curvature():
    grid = geo.GridSpec(32)
    assert np.all(geo.gauss_curvature(geo.DiagonalMetric.flat(grid)) == 0)
    assert np.allclose(geo.gauss_curvature(geo.DiagonalMetric.flat(grid, 3.7)), 0, atol=1e-14)


def conformal_k_error(n):
    g = conformal(n)
    x = g.grid.x
    return np.abs(geo.gauss_curvature(g) - 0.1 * np.cos(x) * np.exp(-0.2 * np.cos(x))).max()


def test_conformal_curvature_second_order():
    assert conformal_k_error(256) < 1e-4
    assert 3.5 <= ratio(conformal_k_error) <= 4.5


def test_conformal_curvature_general_u():
    # K = -e^{-2u} u'' for a = b = e^{2u}
    u = lambda x: 0.2 * np.sin(x) + 0.05 * np.cos(3 * x)
    upp = lambda x: -0.2 * np.sin(x) - 0.45 * np.cos(3 * x)
    g = conformal(512, u)
    x = g.grid.x
    assert np.abs(geo.gauss_curvature(g) + np.exp(-2 * u(x)) * upp(x)).max() < 10 * g.grid.h**2


def test_ricci_norm_and_trace_identities():
    g = generic(128)
    K = geo.gauss_curvature(g)
    rc = geo.ricci(g)
    assert np.allclose(geo.tensor_norm_sq(g, rc), 2 * K**2, rtol=1e-12, atol=1e-15)
    assert np.allclose(geo.metric_tensor_trace(g, rc), 2 * K, rtol=1e-12, atol=1e-15)
    assert np.allclose(geo.scalar_curvature(g), 2 * K)


def bianchi_error(n):
    g = generic(n)
    return np.abs(geo.divergence(g, geo.ricci(g)) - 0.5 * geo.ddx(geo.scalar_curvature(g), g.grid.h)).max()


def test_contracted_bianchi():
    assert bianchi_error(256) < 1e-4
    assert 3.5 <= ratio(bianchi_error) <= 4.5


# -- Laplace-Beltrami and first-order operators ------------------------------------

def test_flat_laplacian_of_sine():
    grid = geo.GridSpec(256)
    lap = geo.laplace_beltrami(geo.DiagonalMetric.flat(grid), np.sin(grid.x))
    assert np.abs(lap + np.sin(grid.x)).max() < grid.h**2 / 10


def test_laplacian_of_constant_is_zero():
    g = generic(64)
    assert np.abs(geo.laplace_beltrami(g, np.full(64, 3.0))).max() < 1e-12


def conformal_laplacian_error(n):
    g = conformal(n)
    x = g.grid.x
    f = np.sin(x) + 0.3 * np.cos(2 * x)
    fpp = -np.sin(x) - 1.2 * np.cos(2 * x)
    return np.abs(geo.laplace_beltrami(g, f) - np.exp(-0.2 * np.cos(x)) * fpp).max()


def test_conformal_laplacian_identity():
    assert conformal_laplacian_error(256) < 1e-3
    assert 3.5 <= ratio(conformal_laplacian_error) <= 4.5


def test_gradient_norms():
    grid = geo.GridSpec(512)
    x = grid.x
    flat = geo.DiagonalMetric.flat(grid)
    tol = 10 * grid.h**2
    assert np.abs(geo.grad_norm_sq(flat, np.sin(x)) - np.cos(x) ** 2).max() < tol
    four = geo.DiagonalMetric.flat(grid, 4.0)
    assert np.abs(geo.grad_norm_sq(four, np.sin(x)) - np.cos(x) ** 2 / 4).max() < tol
    assert np.all(geo.grad_norm_sq(flat, np.ones(512)) == 0)
    g = generic(512)
    f1, f2 = np.sin(x), np.cos(2 * x)
    expected = np.cos(x) * (-2 * np.sin(2 * x)) / g.a
    assert np.abs(geo.inner_grad(g, f1, f2) - expected).max() < tol


def test_hessian_flat_and_constant():
    grid = geo.GridSpec(512)
    x = grid.x
    hs = geo.hessian(geo.DiagonalMetric.flat(grid), np.sin(x))
    assert np.abs(hs.xx + np.sin(x)).max() < grid.h**2
    assert np.all(hs.yy == 0)
    hc = geo.hessian(generic(64), np.full(64, 2.0))
    assert np.all(hc.xx == 0) and np.all(hc.yy == 0)


def hessian_trace_error(n):
    g = generic(n)
    x = g.grid.x
    f = np.exp(0.3 * np.sin(x)) + 0.2 * np.cos(3 * x)
    return np.abs(geo.metric_tensor_trace(g, geo.hessian(g, f)) - geo.laplace_beltrami(g, f)).max()


def test_hessian_trace_is_laplacian():
    assert hessian_trace_error(256) < 1e-3
    assert 3.5 <= ratio(hessian_trace_error) <= 4.5


def test_divergence_examples():
    grid = geo.GridSpec(256)
    x = grid.x
    flat = geo.DiagonalMetric.flat(grid)
    t = geo.SymTensor2Field(np.cos(x), np.zeros_like(x))
    assert np.abs(geo.divergence(flat, t) + np.sin(x)).max() < grid.h**2
    assert np.all(geo.divergence(generic(64), geo.SymTensor2Field.zeros(64)) == 0)


def test_metric_tensor_identities():
    g = generic(64)
    x = g.grid.x
    gt = g.as_tensor()
    v = geo.VectorField(np.cos(x), 1 + 0.5 * np.sin(x))
    assert np.allclose(geo.tensor_norm_sq(g, gt), 2)
    assert np.allclose(geo.metric_tensor_trace(g, gt), 2)
    assert np.allclose(geo.tensor_apply(g, gt, v), geo.vector_norm_sq(g, v))
    z = geo.SymTensor2Field.zeros(64)
    assert np.all(geo.tensor_norm_sq(g, z) == 0) and np.all(geo.metric_tensor_trace(g, z) == 0)


def by_parts_error(n):
    g = generic(n)
    x = g.grid.x
    f, w = np.sin(x) + 0.3 * np.cos(3 * x), np.exp(0.5 * np.cos(x))
    return abs(geo.integrate(g, f * geo.laplace_beltrami(g, w)) + geo.integrate(g, geo.inner_grad(g, f, w)))


def test_integration_by_parts():
    assert by_parts_error(256) < 1e-3
    assert 3.5 <= ratio(by_parts_error) <= 4.5


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(0.5, 2.0))
def test_laplacian_conserves_integral(ca, sb, scale):
    # the flux form telescopes, so int Delta f dy vanishes to round-off
    grid = geo.GridSpec(64)
    x = grid.x
    g = geo.DiagonalMetric(grid, scale * np.exp(ca * np.cos(x)), np.exp(sb * np.sin(x)))
    f = np.sin(x) + np.cos(2 * x) ** 2
    assert abs(geo.integrate(g, geo.laplace_beltrami(g, f))) < 1e-11


# -- quadrature -------------------------------------------------------------------

def test_flat_volume_and_periodic_integral():
    grid = geo.GridSpec(64)
    flat = geo.DiagonalMetric.flat(grid)
    assert geo.volume(flat) == pytest.approx(4 * np.pi**2, rel=1e-14)
    assert abs(geo.integrate(flat, np.sin(grid.x))) < 1e-13


def test_conformal_volume_against_adaptive_quadrature():
    oracle = 2 * np.pi * quad(lambda x: np.exp(0.2 * np.cos(x)), 0, 2 * np.pi, epsabs=1e-14)[0]
    assert geo.volume(conformal(64)) == pytest.approx(oracle, rel=1e-13)


def test_scaled_metric():
    g = generic(32)
    assert geo.volume(g.scaled(3.0)) == pytest.approx(3.0 * geo.volume(g), rel=1e-14)
    assert np.allclose(geo.gauss_curvature(g.scaled(3.0)), geo.gauss_curvature(g) / 3.0)

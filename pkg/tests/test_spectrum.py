import numpy as np
import pytest
from scipy.linalg import eigh

from flowlab import flows as fl
from flowlab import geometry as geo
from flowlab import spectrum as spc
from flowlab.errors import ConfigurationError, ConvergenceError


def flat(n=64):
    return geo.DiagonalMetric.flat(geo.GridSpec(n))


def wiggly(n=64, amp=0.1):
    g = geo.GridSpec(n)
    return geo.DiagonalMetric.conformal(g, amp * np.cos(g.x) + 0.05 * np.sin(2 * g.x))


def dense_spectrum(g, A, c):
    """Generalized eigenproblem K f = lam M f with K assembled edge by edge."""
    n, h = g.grid.n_points, g.grid.h
    coef = np.sqrt(g.b / g.a)
    k = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        w = (coef[i] + coef[j]) / (2 * h**2)
        k[np.ix_([i, j], [i, j])] += w * np.array([[1, -1], [-1, 1]])
    mass = g.density
    return eigh(k + np.diag(c * A * mass), np.diag(mass), eigvals_only=True)


# -- eigenpairs --------------------------------------------------------------------

def test_flat_zero_potential():
    g = flat()
    r = spc.lowest_eigenpair(g, np.zeros(64), 1.0)
    assert abs(r.lam) < 1e-12
    assert np.allclose(r.eigenfunction, geo.volume(g) ** -0.5, rtol=1e-10)


def test_constant_potential_shift():
    g = wiggly()
    r = spc.lowest_eigenpair(g, np.full(64, 0.7), 0.5)
    assert r.lam == pytest.approx(0.35, abs=1e-10)
    assert np.allclose(r.eigenfunction, geo.volume(g) ** -0.5, rtol=1e-8)


@pytest.mark.parametrize("metric", [flat, wiggly], ids=["flat", "wiggly"])
def test_dense_oracle(metric):
    g = metric()
    A = np.cos(g.grid.x)
    lam = spc.lowest_eigenpair(g, A, 1.0).lam
    assert lam == pytest.approx(dense_spectrum(g, A, 1.0)[0], abs=1e-8)


def test_eigenpair_invariants():
    g = wiggly(128)
    A = geo.scalar_curvature(g) + np.sin(g.grid.x)
    r = spc.lowest_eigenpair(g, A, 0.75)
    assert r.eigenfunction.min() > 0
    assert abs(geo.integrate(g, r.eigenfunction**2) - 1) <= 1e-10
    assert r.residual <= 1e-10 * max(1, abs(r.lam))
    assert r.c == 0.75
    # Rayleigh consistency in the operator's own discrete Dirichlet form
    assert r.lam == pytest.approx(spc.rayleigh_quotient(g, A, 0.75, r.eigenfunction), abs=1e-8)


def test_restarts_agree():
    g = wiggly(128)
    A = np.cos(g.grid.x) - 0.3 * np.sin(3 * g.grid.x)
    results = [spc.lowest_eigenpair(g, A, 1.0, seed=s) for s in range(5)]
    for r in results[1:]:
        assert r.lam == pytest.approx(results[0].lam, abs=1e-10)
        assert np.abs(r.eigenfunction - results[0].eigenfunction).max() < 1e-8


def test_concave_in_c():
    g = wiggly(64)
    x = g.grid.x
    rng = np.random.default_rng(7)
    cs = np.linspace(0.2, 2.0, 5)
    for _ in range(10):
        A = rng.normal() * np.cos(x) + rng.normal() * np.sin(2 * x)
        A -= A.mean()
        lam = np.array([spc.lowest_eigenpair(g, A, c).lam for c in cs])
        assert np.all(np.diff(lam, 2) <= 1e-10)


def test_convergence_error_carries_residual():
    g = wiggly()
    with pytest.raises(ConvergenceError) as info:
        spc.lowest_eigenpair(g, np.cos(g.grid.x), 1.0, max_iter=1)
    assert info.value.residual > 0


# -- 2D assembly check ----------------------------------------------------------------

def test_two_dimensional_check():
    g = flat(32)
    assert abs(spc.lowest_eigenvalue_2d_check(g, np.zeros(32), 1.0, 8)) < 1e-10
    A = np.cos(g.grid.x)
    assert spc.lowest_eigenvalue_2d_check(g, A, 1.0, 16) == pytest.approx(spc.lowest_eigenpair(g, A, 1.0).lam, abs=1e-6)
    w = wiggly(32)
    A = geo.scalar_curvature(w) / 4
    assert spc.lowest_eigenvalue_2d_check(w, A, 1.0, 16) == pytest.approx(spc.lowest_eigenpair(w, A, 1.0).lam, abs=1e-6)
    with pytest.raises(ConfigurationError):
        spc.lowest_eigenvalue_2d_check(flat(128), np.zeros(128), 1.0, 64)


# -- eigenvalue derivative ----------------------------------------------------------------

def eig_of(s, c):
    return spc.lowest_eigenpair(s.metric, fl.trace_a(s), c)


def test_lambda_prime_static_flat_is_zero():
    s = fl.make_state(fl.FlowKind.static(), flat())
    for c in (0.25, 1.0):
        assert abs(spc.lambda_prime_formula(s, eig_of(s, c), c)) < 1e-12


@pytest.fixture(scope="module")
def ricci_traj():
    return fl.evolve(fl.make_state(fl.FlowKind.ricci(), wiggly(128)), 0.02)


def test_lambda_prime_matches_difference(ricci_traj):
    traj = ricci_traj
    j = traj.n_full // 2
    lam = [eig_of(traj.full_state(i), 0.25).lam for i in (j - 1, j + 1)]
    fd = (lam[1] - lam[0]) / (2 * traj.dt)
    s = traj.full_state(j)
    assert spc.lambda_prime_formula(s, eig_of(s, 0.25), 0.25) == pytest.approx(fd, rel=1e-2)


def test_remark_monotone_eigenvalue(ricci_traj):
    traj = ricci_traj
    for c in (0.25, 1.0):
        lam = [eig_of(traj.full_state(j), c).lam for j in range(0, traj.n_full, 10)]
        assert np.all(np.diff(lam) >= -1e-6)


def test_specialized_forms():
    g = wiggly(256)
    ricci = fl.make_state(fl.FlowKind.ricci(), g)
    for c in (0.25, 0.5, 1.0):
        e = eig_of(ricci, c)
        gen = spc.lambda_prime_formula(ricci, e, c)
        assert spc.lambda_prime_flow_specialized(ricci, e, c) == pytest.approx(gen, abs=g.grid.h**2)
    lst = fl.make_state(fl.FlowKind.list_extended(0.5), g, np.sin(g.grid.x))
    e = eig_of(lst, 0.5)
    assert spc.lambda_prime_flow_specialized(lst, e, 0.5) == pytest.approx(spc.lambda_prime_formula(lst, e, 0.5), abs=g.grid.h**2)
    # constant v removes every coupling term
    flat_v = fl.make_state(fl.FlowKind.list_extended(0.5), g, np.full(256, 0.4))
    e_r = eig_of(ricci, 0.5)
    assert np.allclose(spc.lambda_prime_flow_specialized_integrand(flat_v, e_r, 0.5),
                       spc.lambda_prime_flow_specialized_integrand(ricci, e_r, 0.5))
    with pytest.raises(ConfigurationError):
        spc.lambda_prime_flow_specialized(fl.make_state(fl.FlowKind.static(), g), e_r, 0.5)


# -- eigenfunction lemma -----------------------------------------------------------------------

def test_lemma_constant_function():
    lhs, rhs = spc.lemma_identity_residual(wiggly(), np.full(64, 0.3), 0.2)
    assert abs(lhs) < 1e-12 and abs(rhs) < 1e-12


@pytest.mark.parametrize("metric", [flat, wiggly], ids=["flat", "wiggly"])
def test_lemma_second_order(metric):
    def err(n):
        g = metric(n)
        f = np.exp(0.2 * np.cos(g.grid.x))
        lhs, rhs = spc.lemma_identity_residual(g, f, 0.0)
        return abs(lhs - rhs)
    assert 3.5 <= err(128) / err(256) <= 4.5


# -- normalized eigenvalue -----------------------------------------------------------------------

def test_normalized_lambda():
    g = wiggly(128)
    A = geo.scalar_curvature(g) / 4
    base = spc.normalized_lambda(g, spc.lowest_eigenpair(g, A, 0.25).lam)
    for eps in (0.5, 2.0, 10.0):
        ge = g.scaled(eps)
        lam = spc.lowest_eigenpair(ge, geo.scalar_curvature(ge) / 4, 0.25).lam
        assert spc.normalized_lambda(ge, lam) == pytest.approx(base, rel=1e-10)
    assert spc.normalized_lambda(flat(), 0.0) == 0
    with pytest.raises(ConfigurationError):
        spc.normalized_lambda(g, 1.0, dim=3)


def test_lower_bound_pieces():
    s = fl.make_state(fl.FlowKind.static(), flat())
    lb, gap, tensor = spc.lambda_bar_lower_bound(s, eig_of(s, 0.25))
    assert abs(lb) < 1e-12 and abs(gap) < 1e-12 and abs(tensor) < 1e-12
    with pytest.raises(ConfigurationError):
        spc.lambda_bar_lower_bound(s, eig_of(s, 0.5))
    r = fl.make_state(fl.FlowKind.ricci(), wiggly(256))
    e = eig_of(r, 0.25)
    first, _ = spc.holder_terms(r, e)
    assert first == pytest.approx(4 * e.lam, abs=1e-6)
    lb, gap, tensor = spc.lambda_bar_lower_bound(r, e)
    assert gap >= -1e-10 and tensor >= -1e-6 and lb >= -1e-6

import numpy as np
import pytest

from flowlab import flows as fl
from flowlab import geometry as geo
from flowlab.errors import BlowUpError, ConfigurationError


def grid(n=128):
    return geo.GridSpec(n)


def wiggly(g):
    return geo.DiagonalMetric.conformal(g, 0.1 * np.cos(g.x))


# -- kinds and states --------------------------------------------------------

def test_kind_validation():
    with pytest.raises(ConfigurationError):
        fl.FlowKind("mean-curvature")
    with pytest.raises(ConfigurationError):
        fl.FlowKind.list_extended(0.0)
    with pytest.raises(ConfigurationError):
        fl.FlowKind.ricci_harmonic(0.5, -1.0)


def test_state_requires_matching_aux():
    g = grid(32)
    flat = geo.DiagonalMetric.flat(g)
    with pytest.raises(ConfigurationError):
        fl.make_state(fl.FlowKind.list_extended(0.5), flat)
    with pytest.raises(ConfigurationError):
        fl.make_state(fl.FlowKind.ricci(), flat, np.sin(g.x))


def test_rh_horizon():
    kind = fl.FlowKind.ricci_harmonic(0.5, 1.0)
    assert kind.coupling(0.25) == pytest.approx(0.25)
    with pytest.raises(ConfigurationError):
        kind.check_horizon(0.6)


# -- alpha and its trace ----------------------------------------------------------

def test_alpha_reductions():
    g = grid(64)
    m = wiggly(g)
    zero = fl.alpha(fl.make_state(fl.FlowKind.static(), m))
    assert np.all(zero.xx == 0) and np.all(zero.yy == 0)
    flat = fl.alpha(fl.make_state(fl.FlowKind.ricci(), geo.DiagonalMetric.flat(g)))
    assert np.all(flat.xx == 0) and np.all(flat.yy == 0)
    ricci = fl.alpha(fl.make_state(fl.FlowKind.ricci(), m))
    lst = fl.alpha(fl.make_state(fl.FlowKind.list_extended(0.7), m, np.full(64, 2.0)))
    assert np.array_equal(ricci.xx, lst.xx) and np.array_equal(ricci.yy, lst.yy)


def test_trace_a_examples():
    g = grid(256)
    m = wiggly(g)
    assert np.allclose(fl.trace_a(fl.make_state(fl.FlowKind.ricci(), m)), 2 * geo.gauss_curvature(m))
    assert np.all(fl.trace_a(fl.make_state(fl.FlowKind.static(), m)) == 0)
    s = fl.make_state(fl.FlowKind.list_extended(0.5), geo.DiagonalMetric.flat(g), np.sin(g.x))
    assert np.abs(fl.trace_a(s) + 0.5 * np.cos(g.x) ** 2).max() < g.h**2


# -- closed forms ---------------------------------------------------------------------

def test_b_minus_delta_a_closed_examples():
    g = grid(256)
    flat = geo.DiagonalMetric.flat(g)
    assert np.all(fl.b_minus_delta_a_closed(fl.make_state(fl.FlowKind.ricci(), wiggly(g))) == 0)
    s = fl.make_state(fl.FlowKind.list_extended(0.5), flat, np.sin(g.x))
    assert np.abs(fl.b_minus_delta_a_closed(s) - 2 * 0.5 * np.sin(g.x) ** 2).max() < g.h**2
    rh = fl.make_state(fl.FlowKind.ricci_harmonic(0.5, 0.0), flat, np.sin(g.x))
    assert np.array_equal(fl.b_minus_delta_a_closed(rh), fl.b_minus_delta_a_closed(s))


def test_theta_closed_examples():
    g = grid(256)
    flat = geo.DiagonalMetric.flat(g)
    x = g.x
    s = fl.make_state(fl.FlowKind.list_extended(0.5), flat, np.sin(x))
    v = geo.VectorField(np.ones_like(x), np.zeros_like(x))
    assert np.abs(fl.theta_closed(s, v) - 0.5 * (np.cos(x) - np.sin(x)) ** 2).max() < g.h**2
    rh = fl.make_state(fl.FlowKind.ricci_harmonic(0.5, 0.3), wiggly(g), np.full_like(x, 1.3))
    assert np.abs(fl.theta_closed(rh, v)).max() < 1e-12


def test_theta_general_static_is_ricci_form():
    g = grid(128)
    m = wiggly(g)
    s = fl.make_state(fl.FlowKind.static(), m)
    x = g.x
    v = geo.VectorField(np.cos(x), 0.5 + np.sin(x))
    bmda = fl.b_minus_delta_a_closed(s)
    assert np.allclose(fl.theta_general(s, v, bmda), geo.tensor_apply(m, geo.ricci(m), v))
    flat = fl.make_state(fl.FlowKind.static(), geo.DiagonalMetric.flat(g))
    assert np.all(fl.theta_general(flat, v, np.zeros_like(x)) == 0)


def test_grad_a_minus_2div_alpha_paths():
    g = grid(256)
    m = wiggly(g)
    static = fl.grad_a_minus_2div_alpha(fl.make_state(fl.FlowKind.static(), m))
    assert np.all(static.x == 0) and np.all(static.y == 0)
    ricci = fl.grad_a_minus_2div_alpha(fl.make_state(fl.FlowKind.ricci(), m))
    assert np.abs(ricci.x).max() < g.h**2
    s = fl.make_state(fl.FlowKind.list_extended(0.5), m, np.sin(g.x))
    general, closed = fl.grad_a_minus_2div_alpha(s), fl.grad_a_minus_2div_alpha_closed(s)
    assert np.abs(general.x - closed.x).max() < g.h**2


# -- evolution ------------------------------------------------------------------------

def test_static_and_flat_ricci_trajectories_are_constant():
    g = grid(32)
    m = wiggly(g)
    traj = fl.evolve(fl.make_state(fl.FlowKind.static(), m), 0.05)
    assert np.all(traj.a == m.a) and np.all(traj.b == m.b)
    traj = fl.evolve(fl.make_state(fl.FlowKind.ricci(), geo.DiagonalMetric.flat(g)), 0.05)
    assert np.all(traj.a == 1) and np.all(traj.b == 1)


def test_half_step_storage_and_exact_end():
    g = grid(32)
    traj = fl.evolve(fl.make_state(fl.FlowKind.ricci(), wiggly(g)), 0.1, dt=0.003)
    assert traj.times[-1] == pytest.approx(0.1, abs=1e-15)
    assert len(traj) == 2 * (traj.n_full - 1) + 1
    assert np.allclose(np.diff(traj.times), traj.dt / 2)
    with pytest.raises(IndexError):
        traj.state(len(traj))


def test_auto_dt_is_diffusive_bound():
    g = grid(64)
    m = wiggly(g)
    assert fl.auto_dt(m) == pytest.approx(0.2 * g.h**2 * m.a.min())


def test_ricci_flow_flattens_conformal_torus():
    g = grid(64)
    traj = fl.evolve(fl.make_state(fl.FlowKind.ricci(), wiggly(g)), 5.0)
    k = [np.abs(geo.gauss_curvature(traj.full_state(j).metric)).max() for j in (0, traj.n_full // 2, traj.n_full - 1)]
    assert k[2] < k[1] < k[0]


def test_rh_without_decay_reproduces_list_bitwise():
    g = grid(64)
    m = wiggly(g)
    lst = fl.evolve(fl.make_state(fl.FlowKind.list_extended(0.5), m, np.sin(g.x)), 0.02)
    rh = fl.evolve(fl.make_state(fl.FlowKind.ricci_harmonic(0.5, 0.0), m, np.sin(g.x)), 0.02)
    assert np.array_equal(lst.a, rh.a) and np.array_equal(lst.b, rh.b) and np.array_equal(lst.aux, rh.aux)


def test_unstable_step_reports_blow_up_time():
    g = grid(64)
    with pytest.raises(BlowUpError) as info:
        fl.evolve(fl.make_state(fl.FlowKind.ricci(), wiggly(g)), 1.0, dt=40 * fl.auto_dt(wiggly(g)))
    assert 0 < info.value.time <= 1.0


def test_volume_derivative_identity():
    g = grid(128)
    traj = fl.evolve(fl.make_state(fl.FlowKind.list_extended(0.5), wiggly(g), np.sin(g.x)), 0.02)
    vol = np.array([geo.volume(traj.full_state(j).metric) for j in range(traj.n_full)])
    for j in range(1, traj.n_full - 1, 7):
        s = traj.full_state(j)
        dv = (vol[j + 1] - vol[j - 1]) / (2 * traj.dt)
        assert dv == pytest.approx(-geo.integrate(s.metric, fl.trace_a(s)), abs=1e-4)


# -- numeric B - Delta A --------------------------------------------------------------------

def test_numeric_bmda_static_and_range():
    g = grid(32)
    traj = fl.evolve(fl.make_state(fl.FlowKind.static(), wiggly(g)), 0.01)
    assert np.all(fl.b_minus_delta_a_numeric(traj, 2) == 0)
    with pytest.raises(IndexError):
        fl.b_minus_delta_a_numeric(traj, 0)
    with pytest.raises(IndexError):
        fl.b_minus_delta_a_numeric(traj, len(traj) - 1)


@pytest.mark.parametrize("tag", ["ricci", "list", "rh"])
def test_numeric_bmda_matches_closed_form(tag):
    g = grid(128)
    kind = {"ricci": fl.FlowKind.ricci(), "list": fl.FlowKind.list_extended(0.5),
            "rh": fl.FlowKind.ricci_harmonic(0.5, 0.3)}[tag]
    aux = None if kind.aux_name is None else np.sin(g.x)
    traj = fl.evolve(fl.make_state(kind, wiggly(g), aux), 4 * fl.auto_dt(wiggly(g)))
    i = len(traj) // 2
    diff = fl.b_minus_delta_a_numeric(traj, i) - fl.b_minus_delta_a_closed(traj.state(i))
    assert np.abs(diff).max() < 2e-3


def test_closed_forms_nonnegative_on_coupled_flows():
    g = grid(128)
    x = g.x
    rng = np.random.default_rng(3)
    for kind in (fl.FlowKind.list_extended(0.5), fl.FlowKind.ricci_harmonic(0.5, 0.3)):
        traj = fl.evolve(fl.make_state(kind, wiggly(g), np.sin(x) + 0.3 * np.cos(2 * x)), 0.01)
        s = traj.state(len(traj) - 1)
        assert fl.b_minus_delta_a_closed(s).min() >= 0
        for _ in range(5):
            c = rng.normal(size=4)
            v = geo.VectorField(c[0] + c[1] * np.cos(x), c[2] + c[3] * np.sin(x))
            assert fl.theta_closed(s, v).min() >= -g.h**2

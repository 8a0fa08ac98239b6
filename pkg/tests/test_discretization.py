"""Ghost-node Laplacian, nonlocal flux quadrature, and the Green identity."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nlheat import Grid, GridState, boundary_flux, discrete_laplacian, rhs
from nlheat.discretization import power
from nlheat.errors import InvalidProblemError
from nlheat.problem import LEFT, RIGHT, InitialDatum
from conftest import const_spec


def test_grid_invariants():
    g = Grid(n=16, length=2.0)
    assert g.h * g.n == pytest.approx(2.0)
    assert g.weights.sum() == pytest.approx(2.0, rel=1e-14)
    with pytest.raises(InvalidProblemError):
        Grid(n=4, length=1.0)


def test_flux_constant_state():
    g = Grid(n=64, length=1.0)
    spec = const_spec(p=2.0, l=2.0, k=1.0)
    state = GridState(t=0.0, u=np.ones(65))
    assert boundary_flux(state, spec, LEFT, g) == pytest.approx(1.0, rel=1e-14)
    assert boundary_flux(state, spec, RIGHT, g) == pytest.approx(1.0, rel=1e-14)


def test_flux_exact_on_linear_integrand():
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=1.0, l=1.0, k=1.0)
    state = GridState(t=0.0, u=g.nodes.copy())
    assert boundary_flux(state, spec, LEFT, g) == pytest.approx(0.5, rel=1e-14)


def test_flux_quadratic_integrand_second_order():
    # trapezoid error against int_0^1 y^2 dy = 1/3
    spec = const_spec(p=1.0, l=2.0, k=1.0)
    g = Grid(n=200, length=1.0)
    state = GridState(t=0.0, u=g.nodes.copy())
    err200 = abs(boundary_flux(state, spec, LEFT, g) - 1.0 / 3.0)
    assert err200 < 1e-4
    g2 = Grid(n=400, length=1.0)
    err400 = abs(boundary_flux(GridState(0.0, g2.nodes.copy()), spec, LEFT, g2) - 1.0 / 3.0)
    assert err200 / err400 == pytest.approx(4.0, rel=0.05)


@settings(max_examples=50, deadline=None)
@given(
    u=arrays(np.float64, 33, elements=st.floats(0.0, 10.0)),
    bump=st.floats(0.0, 5.0),
    node=st.integers(0, 32),
)
def test_flux_monotone_in_nodal_values(u, bump, node):
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=1.0, l=1.5, k=1.0)
    base = boundary_flux(GridState(0.0, u), spec, LEFT, g)
    u2 = u.copy()
    u2[node] += bump
    assert boundary_flux(GridState(0.0, u2), spec, LEFT, g) >= base - 1e-14


def test_laplacian_zero_on_constants():
    g = Grid(n=32, length=1.0)
    out = discrete_laplacian(np.full(33, 7.0), 0.0, 0.0, g)
    assert np.max(np.abs(out)) < 1e-12


def test_laplacian_exact_on_quadratics_with_consistent_fluxes():
    g = Grid(n=32, length=1.0)
    u = g.nodes**2
    # outward normal derivatives of x^2: 0 on the left, 2 on the right
    out = discrete_laplacian(u, 0.0, 2.0, g)
    assert np.max(np.abs(out - 2.0)) < 1e-11


def test_laplacian_affine_decomposition():
    # linear in u for fixed fluxes; the flux contribution is state-independent
    g = Grid(n=16, length=1.0)
    rng = np.random.default_rng(7)
    u, v = rng.random(17), rng.random(17)
    a, b = 2.5, -1.25
    combined = discrete_laplacian(a * u + b * v, 0.3, -0.2, g)
    parts = a * discrete_laplacian(u, 0.0, 0.0, g) + b * discrete_laplacian(v, 0.0, 0.0, g)
    flux_only = discrete_laplacian(np.zeros(17), 0.3, -0.2, g)
    assert np.allclose(combined, parts + flux_only, atol=1e-9)


@settings(max_examples=100, deadline=None)
@given(
    u=arrays(np.float64, 41, elements=st.floats(-50.0, 50.0)),
    g0=st.floats(-10.0, 10.0),
    gl=st.floats(-10.0, 10.0),
)
def test_discrete_green_identity(u, g0, gl):
    g = Grid(n=40, length=1.0)
    lap = discrete_laplacian(u, g0, gl, g)
    total = float(np.dot(g.weights, lap))
    scale = max(abs(g0) + abs(gl), float(np.max(np.abs(u))) / g.h, 1.0)
    assert abs(total - (g0 + gl)) <= 1e-12 * scale


def test_rhs_zero_state():
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=2.0, l=2.0, c=1.0, k=1.0)
    out = rhs(GridState(0.0, np.zeros(33)), spec, g)
    assert np.max(np.abs(out)) == 0.0


def test_rhs_pure_absorption():
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=2.0, l=2.0, c=1.0, k=0.0)
    out = rhs(GridState(0.0, np.ones(33)), spec, g)
    assert np.allclose(out, -1.0, atol=1e-12)


def test_rhs_manufactured_residual_second_order():
    # cooling cosine mode: flux-consistent (zero) data, so the max-norm
    # residual is pure interior truncation, second order in h
    from nlheat.harness.convergence import _cooling_cosine_case

    case = _cooling_cosine_case()
    t = 0.03

    def residual(n):
        g = Grid(n=n, length=1.0)
        u = case.exact(g.nodes, t)
        out = rhs(GridState(t, u), case.spec, g)
        u_t = -np.pi**2 * np.exp(-np.pi**2 * t) * np.cos(np.pi * g.nodes)
        return float(np.max(np.abs(out - u_t)))

    r100, r200 = residual(100), residual(200)
    assert r200 < r100
    assert r100 / r200 == pytest.approx(4.0, rel=0.2)


def test_rhs_parabola_case_exact_in_the_interior():
    # quadratic profile: the stencil is exact away from the flux quadrature,
    # whose O(h^2) defect enters only through the two ghost closures
    from nlheat.harness.convergence import _growing_parabola_case

    case = _growing_parabola_case()
    t = 0.3
    g = Grid(n=100, length=1.0)
    u = case.exact(g.nodes, t)
    out = rhs(GridState(t, u), case.spec, g, forcing=case.forcing)
    resid = np.abs(out - case.exact(g.nodes, t))
    assert np.max(resid[1:-1]) < 1e-10
    assert np.max(resid) < 0.05 * np.max(np.abs(u))


def test_power_conventions_at_zero():
    u = np.array([0.0, 0.25, 4.0])
    assert power(u, 0.5)[0] == 0.0
    assert power(u, 0.5)[1] == 0.5
    assert np.allclose(power(u, 2.0), u * u)
    assert np.allclose(power(u, 0.7), np.array([0.0, 0.25**0.7, 4.0**0.7]))

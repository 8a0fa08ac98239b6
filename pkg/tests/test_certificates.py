"""Certificate construction, residual checking, and sandwich comparison."""
import math

import numpy as np
import pytest
from scipy import integrate

import nlheat as nl
from nlheat import Grid, SandwichViolationError, StepControl, run
from nlheat.certificates import (
    CertificateKind,
    build_boundary_layer_supersolution,
    build_eigen_supersolution,
    build_ode_bound,
    build_psi_profile_subsolution,
    check_certificate,
    damped_growth_factor,
    decaying_floor,
    extinction_factor,
    extinction_threshold,
    make_constant_certificate,
    make_zero_certificate,
    sandwich_test,
    scan_collar_subsolution,
    solve_eigenpair,
    solve_psi,
    verify_time_derivative,
)
from nlheat.coefficients import TimeProfile
from nlheat.errors import CertificateInfeasibleError, HypothesisNotMetError, InvalidProblemError
from conftest import const_spec


# -- auxiliary profiles -------------------------------------------------------


def test_eigenpair_closed_forms(grid400):
    eig = solve_eigenpair(grid400)
    assert eig.lambda1 == pytest.approx(math.pi**2, rel=1e-14)
    assert eig.phi[200] == pytest.approx(1.0, rel=1e-14)
    assert eig.normal_derivative == (pytest.approx(-math.pi), pytest.approx(-math.pi))
    eig2 = solve_eigenpair(Grid(n=64, length=2.0))
    assert eig2.lambda1 == pytest.approx(math.pi**2 / 4.0, rel=1e-14)


def test_eigenpair_dirichlet_residual_second_order():
    def resid(n):
        g = Grid(n=n, length=1.0)
        e = solve_eigenpair(g)
        lap = (e.phi[:-2] - 2 * e.phi[1:-1] + e.phi[2:]) / g.h**2
        return float(np.max(np.abs(lap + e.lambda1 * e.phi[1:-1])))

    r1, r2 = resid(100), resid(200)
    assert math.log2(r1 / r2) >= 1.9
    g = Grid(n=100, length=1.0)
    e = solve_eigenpair(g)
    assert e.phi[0] == 0.0 and abs(e.phi[-1]) < 1e-15


def test_psi_solution_example(grid400):
    psi = solve_psi(grid400, 0.25)
    assert psi.b == pytest.approx(0.125)
    assert psi.sup_psi == pytest.approx(0.25)
    assert psi.psi_at(0.5) == pytest.approx(0.125)
    # unit interior laplacian, exact up to roundoff amplified by 1/h^2
    lap = (psi.psi[:-2] - 2 * psi.psi[1:-1] + psi.psi[2:]) / grid400.h**2
    assert np.max(np.abs(lap - 1.0)) < 1e-9


def test_psi_positivity_gate(grid400):
    with pytest.raises(InvalidProblemError):
        solve_psi(grid400, 0.125)


# -- eigen supersolution ------------------------------------------------------


def test_eigen_supersolution_constants_and_check(grid400):
    spec = const_spec(p=2.0, l=1.0, c=1.0, k=1.0, u0=1.0)
    eig = solve_eigenpair(grid400)
    cert = build_eigen_supersolution(spec, eig, (0.0, 5.0))
    # the slope constant dominates the quadrature/kernel ratio from the proof
    quad_oracle, _ = integrate.quad(lambda y: 1.0 / (math.sin(math.pi * y) + 1.0), 0, 1)
    assert cert.constants["a"] >= max(quad_oracle / math.pi, 1.0)
    report = check_certificate(cert, spec, grid400, (0.0, 5.0), "super")
    assert report.passed
    verify_time_derivative(cert, grid400)


def test_eigen_supersolution_trivial_flux(grid400):
    spec = const_spec(p=2.0, l=0.5, c=1.0, k=0.0, u0=1.0)
    cert = build_eigen_supersolution(spec, solve_eigenpair(grid400), (0.0, 5.0))
    assert cert.constants["a"] == pytest.approx(1.05)
    assert cert.constants["C"] >= 1.0
    assert check_certificate(cert, spec, grid400, (0.0, 5.0), "super").passed


def test_eigen_supersolution_gate(grid400):
    with pytest.raises(HypothesisNotMetError):
        build_eigen_supersolution(const_spec(p=1.0, l=2.0), solve_eigenpair(grid400))


# -- boundary layer -----------------------------------------------------------


def test_boundary_layer_standard(grid400):
    spec = const_spec(p=3.0, l=2.0, c=1.0, k=1.0, u0=1.0)
    cert = build_boundary_layer_supersolution(spec, grid400, (0.0, 10.0))
    beta = cert.constants["beta"]
    assert max(1.0 / 2.0, 1.0) < beta < 2.0
    assert check_certificate(cert, spec, grid400, (0.0, 10.0), "super").passed
    verify_time_derivative(cert, grid400, (0.0, 10.0))


def test_boundary_layer_gate(grid400):
    with pytest.raises(HypothesisNotMetError):
        build_boundary_layer_supersolution(const_spec(p=1.5, l=2.0), grid400)


def test_boundary_layer_borderline_large_ratio(grid400):
    spec = const_spec(p=2.0, l=2.0, c=100.0, k=1.0, u0=1.0)
    cert = build_boundary_layer_supersolution(spec, grid400, (0.0, 10.0))
    assert cert.constants["beta"] == pytest.approx(2.0)
    assert check_certificate(cert, spec, grid400, (0.0, 10.0), "super").passed


def test_boundary_layer_borderline_small_ratio_infeasible(grid400):
    spec = const_spec(p=2.0, l=2.0, c=0.01, k=1.0, u0=1.0)
    with pytest.raises(CertificateInfeasibleError):
        build_boundary_layer_supersolution(spec, grid400, (0.0, 10.0))


def test_boundary_layer_monotone_in_plateau(grid400):
    # doubling the plateau never turns a passing certificate into a failing one
    from nlheat.certificates import _finish_layer_certificate

    spec = const_spec(p=3.0, l=2.0, c=1.0, k=1.0, u0=1.0)
    cert = build_boundary_layer_supersolution(spec, grid400, (0.0, 10.0))
    cns = cert.constants
    doubled = _finish_layer_certificate(
        cns["alpha"], cns["eps"], cns["omega"], cns["beta"], cns["gamma"],
        2.0 * cns["A"], 1.0, (0.0, 10.0),
    )
    assert check_certificate(doubled, spec, grid400, (0.0, 10.0), "super").passed


# -- pure-time ODE bounds -----------------------------------------------------


def test_decaying_floor_linear_absorption():
    w, dw = decaying_floor(1.0, TimeProfile(1.0), A=2.0)
    assert float(w(0.0)) == pytest.approx(2.0)
    assert float(w(1.0)) == pytest.approx(2.0 / math.e, rel=1e-12)
    assert float(dw(1.0)) == pytest.approx(-2.0 / math.e, rel=1e-12)


def test_decaying_floor_sublinear_absorption_hits_zero():
    w, _ = decaying_floor(0.5, TimeProfile(1.0), A=4.0)
    ts = np.array([0.0, 2.0, 4.0, 5.0])
    assert np.allclose(w(ts), [(2.0 - t / 2.0) ** 2 if t < 4 else 0.0 for t in ts], atol=1e-12)


def test_sub_low_certificate_checks_as_subsolution(grid400):
    spec = const_spec(p=1.0, l=2.0, c=1.0, k=1.0, u0=2.0)
    cert = build_ode_bound(spec, "sub-low-absorption", {"A": 2.0, "window": (0.0, 2.0)})
    assert cert.kind is CertificateKind.ODE_SUB
    report = check_certificate(cert, spec, grid400, (0.0, 2.0), "sub")
    assert report.passed
    verify_time_derivative(cert, grid400, (0.0, 2.0))


def test_sub_low_as_supersolution_fails_at_the_boundary(grid400):
    # zero normal derivative cannot dominate a positive nonlocal flux
    spec = const_spec(p=1.0, l=2.0, c=1.0, k=1.0, u0=2.0)
    cert = build_ode_bound(spec, "sub-low-absorption", {"A": 2.0, "window": (0.0, 2.0)})
    report = check_certificate(cert, spec, grid400, (0.0, 2.0), "super")
    assert not report.passed
    assert report.failing == ("boundary",)
    assert report.boundary_min == pytest.approx(-4.0, rel=1e-6)  # worst at t = 0


def test_sub_steep_certificate(grid400):
    spec = const_spec(p=1.5, l=3.0, c=1.0, k=1.0, u0=50.0)
    cert = build_ode_bound(spec, "sub-steep-absorption", {"window": (0.0, 1.0)})
    assert cert.gates["w0_below_u0"]
    assert check_certificate(cert, spec, grid400, (0.0, 1.0), "sub").passed


def test_extinction_threshold_example():
    # p = 1/2, c0 = 1, b = 1/8, tau = 1
    thresh = extinction_threshold(0.5, 1.0, 0.125, 1.0)
    oracle = (1.0 * 0.125**0.5 * (1.0 - math.exp(-0.5 * 1.0 / 0.125))) ** 2.0
    assert thresh == pytest.approx(oracle, rel=1e-14)
    f, _ = extinction_factor(0.5, 1.0, 0.125, 0.9 * thresh)
    assert float(f(1.0)) == 0.0
    assert float(f(5.0)) == 0.0
    assert float(f(0.0)) == pytest.approx(0.9 * thresh)


def test_super_small_data_certificate(grid400):
    spec = const_spec(p=0.5, l=2.0, c=1.0, k=1.0, u0=0.001)
    cert = build_ode_bound(spec, "super-small-data", {"tau": 1.0}, grid=grid400)
    assert cert.kind is CertificateKind.PSI_PROFILE_SUPER
    assert cert.constants["f0"] < cert.constants["threshold_extinction"]
    report = check_certificate(cert, spec, grid400, (0.0, 2.0), "super")
    assert report.passed
    verify_time_derivative(cert, grid400, (0.0, 0.45))


def test_super_kernel_dominated_certificate(grid400):
    spec = const_spec(p=1.5, l=3.0, c=1.0, k=1.0, u0=1e-6)
    cert = build_ode_bound(spec, "super-kernel-dominated", {"window": (0.0, 5.0)}, grid=grid400)
    report = check_certificate(cert, spec, grid400, (0.0, 5.0), "super")
    assert report.passed


def test_ode_bound_gates(grid400):
    with pytest.raises(HypothesisNotMetError):
        build_ode_bound(const_spec(p=2.0, l=3.0), "sub-low-absorption")
    with pytest.raises(HypothesisNotMetError):
        build_ode_bound(const_spec(p=0.5, l=2.0), "sub-steep-absorption")
    with pytest.raises(HypothesisNotMetError):
        build_ode_bound(const_spec(p=2.0, l=3.0), "super-small-data", grid=grid400)
    with pytest.raises(HypothesisNotMetError):
        build_ode_bound(const_spec(p=0.5, l=2.0), "super-kernel-dominated", grid=grid400)
    with pytest.raises(ValueError):
        build_ode_bound(const_spec(p=1.0, l=2.0), "nonsense")


# -- psi-profile lower bound and collar ---------------------------------------


def test_psi_profile_subsolution_window_flagged(grid100):
    # decaying absorption with constant kernel: the kernel eventually wins
    spec = nl.ProblemSpec.build(
        p=1.5,
        l=3.0,
        c=nl.CoefficientDescriptor("exponential", 1.0, rate=-2.0),
        k=nl.CoefficientDescriptor("constant", 1.0),
        u0=nl.constant_datum(1.0),
    )
    cert = build_psi_profile_subsolution(spec, grid100, t1=4.0, f_t1=0.05, window_end=6.0)
    assert cert.constants["window_dependent"] is True
    assert cert.constants["d1_estimate"] > 0.0
    report = check_certificate(
        cert, spec, grid100, (4.0, 6.0), "sub",
        initial_values=cert.evaluate(grid100.nodes, 4.0),
    )
    assert report.passed


def test_psi_profile_subsolution_infeasible_window(grid100):
    spec = nl.ProblemSpec.build(
        p=1.5,
        l=3.0,
        c=nl.CoefficientDescriptor("exponential", 1.0, rate=-2.0),
        k=nl.CoefficientDescriptor("constant", 1.0),
        u0=nl.constant_datum(1.0),
    )
    with pytest.raises(CertificateInfeasibleError):
        build_psi_profile_subsolution(spec, grid100, t1=0.0, f_t1=0.05, window_end=1.0)


def test_collar_subsolution_on_strong_blowup_run():
    grid = Grid(n=200, length=1.0)
    spec = const_spec(p=0.5, l=2.0, c=1.0, k=1.0, u0=1000.0)
    out = run(spec, grid, StepControl(err_tol=1e-8), horizon=1.0)
    assert out.kind.value == "BlowUp"
    cert, report = scan_collar_subsolution(spec, grid, out.trajectory)
    assert report.passed
    assert cert.constants["sigma"] > 2.0 / (spec.l - 1.0)
    assert cert.constants["gamma"] < cert.constants["t2"] - cert.constants["t0"]


def test_collar_shallow_variant_small_ratio():
    # balanced exponents with weak absorption against a unit kernel
    grid = Grid(n=200, length=1.0)
    spec = const_spec(p=2.0, l=2.0, c=0.01, k=1.0, u0=1000.0)
    out = run(spec, grid, StepControl(err_tol=1e-8), horizon=1.0)
    assert out.kind.value == "BlowUp"
    cert, report = scan_collar_subsolution(spec, grid, out.trajectory, variant="shallow")
    assert report.passed
    assert cert.constants["sigma"] == pytest.approx(2.0 / (spec.p - 1.0))


# -- checker behaviors --------------------------------------------------------


def test_zero_certificate_passes_both_directions(grid100):
    spec = const_spec(p=2.0, l=1.5, c=1.0, k=1.0, u0=0.0)
    zero = make_zero_certificate((0.0, 1.0))
    assert check_certificate(zero, spec, grid100, (0.0, 1.0), "super").passed
    assert check_certificate(zero, spec, grid100, (0.0, 1.0), "sub").passed


def test_constant_certificate_initial_offender(grid100):
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0, u0=2.0)
    one = make_constant_certificate(1.0, (0.0, 1.0), "super")
    report = check_certificate(one, spec, grid100, (0.0, 1.0), "super")
    assert not report.passed
    assert report.failing == ("initial",)
    assert report.initial_min == pytest.approx(-1.0)


def test_sandwich_constant_heat_only(grid100):
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0, u0=1.0)
    out = run(spec, grid100, StepControl(), horizon=1.0)
    one_lo = make_constant_certificate(1.0, (0.0, 1.0), "sub")
    one_hi = make_constant_certificate(1.0, (0.0, 1.0), "super")
    report = sandwich_test(spec, one_lo, one_hi, out.trajectory)
    assert report.passed
    assert report.samples_checked > 10


def test_sandwich_violation_carries_first_point(grid100):
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0, u0=1.0)
    out = run(spec, grid100, StepControl(), horizon=0.5)
    too_low = make_constant_certificate(0.5, (0.0, 0.5), "super")
    with pytest.raises(SandwichViolationError) as err:
        sandwich_test(spec, None, too_low, out.trajectory)
    assert err.value.side == "upper"
    assert err.value.t == pytest.approx(0.0)

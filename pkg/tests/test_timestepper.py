"""Adaptive integration, blow-up declaration, and time extrapolation."""
import hashlib

import numpy as np
import pytest

from nlheat import (
    FitDegenerateError,
    Grid,
    GridState,
    NonConvergenceError,
    RunKind,
    StepControl,
    estimate_blowup_time,
    run,
    step,
)
from nlheat.timestepper import Location
from conftest import const_spec


def test_step_steady_state():
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0, u0=5.0)
    state = GridState(0.0, np.full(33, 5.0))
    out = step(state, 1e-3, spec, g)
    assert np.array_equal(out.u, state.u)
    assert out.t == pytest.approx(1e-3)


def test_step_pure_decay_is_exact_euler():
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=1.0, l=1.0, c=1.0, k=0.0, u0=1.0)
    out = step(GridState(0.0, np.ones(33)), 1e-3, spec, g)
    assert np.allclose(out.u, 1.0 - 1e-3, atol=1e-15)


def test_heat_only_mass_conserved_per_step():
    from nlheat import cosine_datum

    g = Grid(n=64, length=1.0)
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0).with_u0(cosine_datum(1.0, 1.0, 1.0))
    state = GridState(0.0, spec.u0.value(g.nodes))
    dt = 0.4 * g.h * g.h
    mass0 = float(np.dot(g.weights, state.u))
    for _ in range(200):
        state = step(state, dt, spec, g)
        assert abs(float(np.dot(g.weights, state.u)) - mass0) < 1e-12
        mass0 = float(np.dot(g.weights, state.u))


def test_global_run_bounded():
    g = Grid(n=100, length=1.0)
    out = run(const_spec(p=2.0, l=1.5, u0=1.0), g, StepControl(), horizon=2.0)
    assert out.kind is RunKind.GLOBAL_TO_HORIZON
    assert out.t_end == pytest.approx(2.0)
    assert np.max(out.trajectory.max_u) < 10.0


def test_blowup_run_classified_with_estimate():
    g = Grid(n=100, length=1.0)
    out = run(const_spec(p=0.5, l=2.0, u0=50.0), g, StepControl(), horizon=10.0)
    assert out.kind is RunKind.BLOW_UP
    assert out.t_star_estimate is not None
    assert out.t_star_estimate >= out.t_end
    assert out.trajectory.max_u[-1] >= StepControl().u_cap
    assert out.trajectory.dt[-1] <= 10.0 * StepControl().dt_floor
    assert out.location in (Location.LEFT, Location.RIGHT)


def test_heat_only_run_mass_constant():
    from nlheat import cosine_datum

    g = Grid(n=100, length=1.0)
    spec = const_spec(p=1.0, l=1.0, c=0.0, k=0.0).with_u0(cosine_datum(1.0, 0.5, 1.0))
    out = run(spec, g, StepControl(), horizon=1.0)
    assert out.kind is RunKind.GLOBAL_TO_HORIZON
    drift = np.max(np.abs(out.trajectory.mass - out.trajectory.mass[0]))
    assert drift < 1e-10


def test_run_is_deterministic():
    g = Grid(n=64, length=1.0)
    spec = const_spec(p=0.5, l=2.0, u0=30.0)

    def fingerprint():
        out = run(spec, g, StepControl(), horizon=5.0)
        return hashlib.sha256(out.trajectory.snapshots.tobytes()).hexdigest()

    assert fingerprint() == fingerprint()


def test_python_driver_agrees_with_compiled_driver():
    g = Grid(n=64, length=1.0)
    spec = const_spec(p=2.0, l=1.5, u0=2.0)
    ctrl = StepControl(sample_dt=0.05)
    a = run(spec, g, ctrl, horizon=0.5, driver="numba")
    b = run(spec, g, ctrl, horizon=0.5, driver="python")
    assert a.kind == b.kind
    assert np.max(np.abs(a.trajectory.snapshots[-1] - b.trajectory.snapshots[-1])) < 1e-8


def test_nonconvergence_reported_distinctly():
    # an unreachable error target pins the step size at the floor; with the
    # solution far below the cap this must surface as non-convergence
    g = Grid(n=32, length=1.0)
    spec = const_spec(p=2.0, l=1.5, u0=1.0)
    ctrl = StepControl(err_tol=1e-300, dt_floor=1e-9, pin_limit=50, max_steps=100_000)
    with pytest.raises(NonConvergenceError):
        run(spec, g, ctrl, horizon=1.0)


def test_discrete_comparison_preserved_under_ordered_data():
    # same coefficients, ordered initial data, identical fixed steps:
    # nodal ordering holds at every sample (l >= 1)
    from nlheat import cosine_datum

    g = Grid(n=64, length=1.0)
    dt = 0.4 * g.h * g.h
    ctrl = StepControl(fixed_dt=dt, sample_dt=0.02)
    lo = const_spec(p=1.0, l=2.0, u0=1.0)
    hi = lo.with_u0(cosine_datum(1.2, 0.1, 1.0))  # 1.1 .. 1.3 >= 1
    out_lo = run(lo, g, ctrl, horizon=0.3)
    out_hi = run(hi, g, ctrl, horizon=0.3)
    assert np.array_equal(out_lo.trajectory.t, out_hi.trajectory.t)
    for j in range(len(out_lo.trajectory)):
        assert np.all(
            out_hi.trajectory.snapshots[j] >= out_lo.trajectory.snapshots[j] - 1e-12
        )


def test_blowup_time_cauchy_under_refinement():
    spec = const_spec(p=0.5, l=2.0, u0=50.0)
    stars = []
    for n, tol in ((50, 1e-6), (100, 1e-7), (200, 1e-8)):
        out = run(spec, Grid(n=n, length=1.0), StepControl(err_tol=tol), horizon=5.0)
        stars.append(out.t_star_estimate)
    inc1, inc2 = abs(stars[1] - stars[0]), abs(stars[2] - stars[1])
    assert inc2 < inc1
    assert inc2 / stars[-1] < 0.05


def test_estimate_exact_hyperbola():
    t = np.linspace(0.0, 0.99, 60)
    m = (1.0 - t) ** -1.0
    est = estimate_blowup_time(t, m, l=2.0)
    assert est.t_star == pytest.approx(1.0, abs=1e-6)
    assert est.rate_exponent == pytest.approx(1.0, abs=1e-3)
    assert est.agreement_gap < 1e-6


def test_estimate_shifted_square_power():
    t = np.linspace(0.0, 0.69, 80)
    m = 3.0 * (0.7 - t) ** -2.0
    est = estimate_blowup_time(t, m, l=1.5)
    assert est.t_star == pytest.approx(0.7, abs=1e-4)
    assert est.rate_exponent == pytest.approx(2.0, abs=1e-2)


def test_estimate_rejects_constant_series():
    t = np.linspace(0.0, 1.0, 30)
    with pytest.raises(FitDegenerateError):
        estimate_blowup_time(t, np.ones_like(t), l=2.0)


def test_estimate_requires_enough_increasing_samples():
    t = np.linspace(0.0, 1.0, 30)
    m = np.ones_like(t)
    m[-4:] = [2.0, 3.0, 4.0, 5.0]
    with pytest.raises(FitDegenerateError):
        estimate_blowup_time(t, m, l=2.0)


def test_fixed_dt_must_respect_stability():
    g = Grid(n=64, length=1.0)
    with pytest.raises(ValueError):
        run(const_spec(p=1.0, l=1.0), g, StepControl(fixed_dt=1.0), horizon=1.0)


def test_control_invariants():
    with pytest.raises(ValueError):
        StepControl(safety=0.0)
    with pytest.raises(ValueError):
        StepControl(dt_floor=1.0, dt_max=0.5)
    with pytest.raises(ValueError):
        StepControl(u_cap=0.5)


def test_mass_balance_defect_along_bounded_run():
    # d/dt mass = flux in - absorption, accumulated over [0, 1]
    from nlheat.monitors import mass_balance_defect, track

    g = Grid(n=400, length=1.0)
    spec = const_spec(p=2.0, l=1.5, u0=1.0)
    out = run(spec, g, StepControl(err_tol=1e-8), horizon=1.0)
    series = track(out.trajectory, spec, g)
    assert mass_balance_defect(series) < 1e-4

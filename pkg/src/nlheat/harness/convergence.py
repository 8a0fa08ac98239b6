"""Manufactured-solution convergence studies and blow-up refinement checks.

Spatial order is measured against exact solutions whose boundary data satisfy
the nonlocal flux identically (so only discretization error remains); the
time step is slaved to h^2, keeping the first-order temporal error on the
same refinement path.  Temporal order uses self-Richardson differences
between halved fixed steps, which cancels the spatial error exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..coefficients import CoefficientDescriptor
from ..discretization import Grid
from ..errors import NonConvergenceError
from ..problem import InitialDatum, ProblemSpec
from ..timestepper import StepControl, run

__all__ = [
    "ManufacturedCase",
    "ConvergenceReport",
    "builtin_cases",
    "spatial_orders",
    "temporal_orders",
    "blowup_cauchy",
    "convergence_suite",
]


@dataclass(frozen=True)
class ManufacturedCase:
    """An exact solution, its interior forcing, and the matching problem."""

    name: str
    spec: ProblemSpec
    forcing: Optional[Callable]
    exact: Callable[[np.ndarray, float], np.ndarray]
    t_end: float


def _growing_parabola_case() -> ManufacturedCase:
    """u* = e^t (1 + x^2): inhomogeneous, with an exactly matched right flux.

    With l = 1 and kernel 3/2 on the right, the nonlocal flux reproduces
    u*_x(1) = 2 e^t exactly; the left flux is zero.  Forcing carries the
    remainder u*_t - u*_xx + c (u*)^p with c = 1, p = 2.
    """
    u0 = InitialDatum(
        fn=lambda x: 1.0 + np.asarray(x, dtype=float) ** 2,
        dfn=lambda x: 2.0 * np.asarray(x, dtype=float),
        label="one-plus-x-squared",
    )
    spec = ProblemSpec.build(
        p=2.0,
        l=1.0,
        c=CoefficientDescriptor("constant", 1.0),
        k=(
            CoefficientDescriptor("constant", 0.0),
            CoefficientDescriptor("constant", 1.5),
        ),
        u0=u0,
        length=1.0,
    )

    def exact(x, t):
        return math.exp(t) * (1.0 + np.asarray(x, dtype=float) ** 2)

    def forcing(x, t):
        x = np.asarray(x, dtype=float)
        et = math.exp(t)
        return et * (1.0 + x * x) - 2.0 * et + (et * (1.0 + x * x)) ** 2

    return ManufacturedCase("growing-parabola", spec, forcing, exact, t_end=0.25)


def _cooling_cosine_case() -> ManufacturedCase:
    """u* = e^{-pi^2 t} cos(pi x) + 2: pure heat flow with zero flux data."""
    spec = ProblemSpec.build(
        p=1.0,
        l=1.0,
        c=CoefficientDescriptor("constant", 0.0),
        k=CoefficientDescriptor("constant", 0.0),
        u0=InitialDatum(
            fn=lambda x: np.cos(math.pi * np.asarray(x, dtype=float)) + 2.0,
            dfn=lambda x: -math.pi * np.sin(math.pi * np.asarray(x, dtype=float)),
            label="cosine-plus-two",
        ),
        length=1.0,
    )

    def exact(x, t):
        return math.exp(-math.pi**2 * t) * np.cos(math.pi * np.asarray(x, dtype=float)) + 2.0

    return ManufacturedCase("cooling-cosine", spec, None, exact, t_end=0.1)


def builtin_cases() -> list[ManufacturedCase]:
    return [_growing_parabola_case(), _cooling_cosine_case()]


def _max_error_at_end(case: ManufacturedCase, n: int) -> float:
    grid = Grid(n=n, length=case.spec.domain.length)
    dt = 0.4 * grid.h * grid.h
    ctrl = StepControl(fixed_dt=dt, sample_dt=case.t_end, max_samples=64)
    outcome = run(case.spec, grid, ctrl, case.t_end, forcing=case.forcing)
    u_end = outcome.trajectory.snapshots[-1]
    return float(np.max(np.abs(u_end - case.exact(grid.nodes, case.t_end))))


def spatial_orders(case: ManufacturedCase, levels=(100, 200, 400)) -> tuple[list[float], list[float]]:
    """Max-norm errors at the final time and observed orders between levels."""
    errors = [_max_error_at_end(case, n) for n in levels]
    orders = [
        math.log2(errors[i] / errors[i + 1]) if errors[i + 1] > 0.0 else math.inf
        for i in range(len(errors) - 1)
    ]
    return errors, orders


def temporal_orders(case: ManufacturedCase, n: int = 128, dt0: Optional[float] = None, levels: int = 3):
    """Observed temporal orders from successive step halvings at fixed n.

    Self-Richardson differences between dt and dt/2 runs cancel the spatial
    error entirely, isolating the integrator's O(dt) component.
    """
    grid = Grid(n=n, length=case.spec.domain.length)
    if dt0 is None:
        dt0 = 0.64 * grid.h * grid.h
    ends = []
    for k in range(levels + 1):
        ctrl = StepControl(fixed_dt=dt0 / 2**k, sample_dt=case.t_end, max_samples=64)
        outcome = run(case.spec, grid, ctrl, case.t_end, forcing=case.forcing)
        ends.append(outcome.trajectory.snapshots[-1])
    diffs = [float(np.max(np.abs(ends[k] - ends[k + 1]))) for k in range(levels)]
    orders = [
        math.log2(diffs[k] / diffs[k + 1]) if diffs[k + 1] > 0.0 else math.inf
        for k in range(levels - 1)
    ]
    return diffs, orders


def blowup_cauchy(
    spec: ProblemSpec,
    horizon: float,
    levels=(100, 200, 400),
    err_tols=None,
    u_cap: float = 1e10,
) -> tuple[list[float], list[float]]:
    """Blow-up time estimates across refinement levels and their increments."""
    t_stars = []
    for i, n in enumerate(levels):
        tol = err_tols[i] if err_tols is not None else 1e-8
        ctrl = StepControl(err_tol=tol, u_cap=u_cap)
        outcome = run(spec, Grid(n=n, length=spec.domain.length), ctrl, horizon)
        if outcome.t_star_estimate is None:
            raise NonConvergenceError(f"level n={n} did not blow up before the horizon")
        t_stars.append(outcome.t_star_estimate)
    increments = [abs(t_stars[i + 1] - t_stars[i]) for i in range(len(t_stars) - 1)]
    return t_stars, increments


@dataclass
class ConvergenceReport:
    """Observed orders for every manufactured case plus optional blow-up study."""

    cases: list = field(default_factory=list)
    temporal: dict = field(default_factory=dict)
    blowup: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"cases": self.cases, "temporal": self.temporal, "blowup": self.blowup}

    def format_table(self) -> str:
        lines = ["case                 errors -> observed spatial orders"]
        for entry in self.cases:
            errs = ", ".join(f"{e:.3e}" for e in entry["errors"])
            orders = ", ".join(f"{o:.2f}" for o in entry["orders"])
            lines.append(f"{entry['name']:<20} [{errs}] -> [{orders}]")
        if self.temporal:
            orders = ", ".join(f"{o:.2f}" for o in self.temporal["orders"])
            lines.append(f"temporal ({self.temporal['case']}): orders [{orders}]")
        if self.blowup:
            stars = ", ".join(f"{t:.6g}" for t in self.blowup["t_stars"])
            lines.append(f"blow-up refinement: t* per level [{stars}]")
        return "\n".join(lines)


def convergence_suite(
    levels=(100, 200, 400),
    blowup_spec: Optional[ProblemSpec] = None,
    blowup_horizon: float = 1.0,
) -> ConvergenceReport:
    """Run the manufactured cases at the given levels; optionally study a blow-up."""
    report = ConvergenceReport()
    cases = builtin_cases()
    for case in cases:
        errors, orders = spatial_orders(case, levels)
        report.cases.append({"name": case.name, "errors": errors, "orders": orders})
    diffs, t_orders = temporal_orders(cases[1])
    report.temporal = {"case": cases[1].name, "diffs": diffs, "orders": t_orders}
    if blowup_spec is not None:
        t_stars, increments = blowup_cauchy(blowup_spec, blowup_horizon, levels)
        report.blowup = {"t_stars": t_stars, "increments": increments}
    return report

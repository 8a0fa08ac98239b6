"""Integral functionals and inequality monitors along numeric trajectories.

Tracks the spatial mass U(t), the cumulative superlinear mass
J(t) = int_0^t int u^l, boundary and interior-band maxima, and the damped mass
W(t) = exp(-t/m) U(t).  Rate and localization monitors test the singular
scalings a boundary-driven blow-up must respect: J bounded by
(t* - t)^(-1/(l-1)) and an interior band that stays below a power envelope
while the boundary diverges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discretization import Grid, GridState, boundary_flux, power
from .errors import HypothesisNotMetError, InsufficientWindowError
from .problem import LEFT, RIGHT, ProblemSpec
from .timestepper import Trajectory

__all__ = [
    "FunctionalSeries",
    "RateReport",
    "LocalizationReport",
    "track",
    "rate_monitor",
    "localization_monitor",
    "mann_kendall",
    "mass_balance_defect",
]


@dataclass(frozen=True)
class FunctionalSeries:
    """Sampled functionals of one trajectory (recomputed by quadrature)."""

    t: np.ndarray
    mass: np.ndarray              # U(t) = int u dx
    cumulative_lp: np.ndarray     # J(t) = int_0^t int u^l dx dtau
    boundary_left: np.ndarray
    boundary_right: np.ndarray
    interior_max: np.ndarray      # over the central band [L/4, 3L/4]
    damped_mass: np.ndarray       # W(t) = exp(-t/m) U(t)
    flux_left: np.ndarray
    flux_right: np.ndarray
    absorption: np.ndarray        # int c u^p dx
    m: float

    def __len__(self) -> int:
        return len(self.t)


def track(trajectory: Trajectory, spec: ProblemSpec, grid: Grid, m: Optional[float] = None) -> FunctionalSeries:
    """Quadrature evaluation of all tracked functionals at every sample.

    The damping constant m defaults to the height of the standard bump profile
    with additive constant L^2/4 (that is, L^2/4 itself).
    """
    if m is None:
        m = grid.length * grid.length / 4.0
    n = len(trajectory)
    xs = grid.nodes
    w = grid.weights
    band = grid.interior_band()
    t = trajectory.t
    mass = np.empty(n)
    lp_density = np.empty(n)
    b_left = np.empty(n)
    b_right = np.empty(n)
    i_max = np.empty(n)
    f_left = np.empty(n)
    f_right = np.empty(n)
    absorb = np.empty(n)
    for j in range(n):
        u = trajectory.snapshots[j]
        tj = float(t[j])
        mass[j] = float(np.dot(w, u))
        lp_density[j] = float(np.dot(w, power(u, spec.l)))
        b_left[j] = u[0]
        b_right[j] = u[-1]
        i_max[j] = float(np.max(u[band]))
        state = GridState(t=tj, u=u)
        f_left[j] = boundary_flux(state, spec, LEFT, grid)
        f_right[j] = boundary_flux(state, spec, RIGHT, grid)
        cvals = spec.c.value(xs, tj) * np.ones_like(xs)
        absorb[j] = float(np.dot(w, cvals * power(u, spec.p)))
    cumulative = np.concatenate(
        ([0.0], np.cumsum(0.5 * (lp_density[1:] + lp_density[:-1]) * np.diff(t)))
    )
    damped = np.exp(-t / m) * mass
    return FunctionalSeries(
        t=t.copy(),
        mass=mass,
        cumulative_lp=cumulative,
        boundary_left=b_left,
        boundary_right=b_right,
        interior_max=i_max,
        damped_mass=damped,
        flux_left=f_left,
        flux_right=f_right,
        absorption=absorb,
        m=m,
    )


def mass_balance_defect(series: FunctionalSeries) -> float:
    """Relative defect of U(t_end) - U(0) against the flux/absorption budget.

    The continuous identity integrates the equation over space and time; on
    samples both time integrals use the trapezoid rule, so the defect reflects
    sampling truncation, not a conservation failure.
    """
    t = series.t
    through = series.flux_left + series.flux_right - series.absorption
    budget = float(np.sum(0.5 * (through[1:] + through[:-1]) * np.diff(t)))
    lhs = float(series.mass[-1] - series.mass[0])
    scale = max(abs(lhs), abs(budget), float(np.max(series.mass)), 1e-300)
    return abs(lhs - budget) / scale


def mann_kendall(values) -> tuple[int, float]:
    """Mann-Kendall S statistic and its normal score Z for a trend test.

    Z > 1.645 rejects "no increasing trend" at one-sided 95%.
    """
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 3:
        raise InsufficientWindowError("trend test needs at least 3 samples")
    s = 0
    for i in range(n - 1):
        s += int(np.sum(np.sign(x[i + 1 :] - x[i])))
    var = n * (n - 1) * (2 * n + 5) / 18.0
    if s > 0:
        z = (s - 1) / math.sqrt(var)
    elif s < 0:
        z = (s + 1) / math.sqrt(var)
    else:
        z = 0.0
    return s, z


@dataclass(frozen=True)
class RateReport:
    """Boundedness check of Q(t) = J(t) (t* - t)^(1/(l-1)) near the singularity."""

    sup_q: float
    trend_s: int
    trend_z: float
    bounded: bool
    window: int


def rate_monitor(series: FunctionalSeries, t_star: float, l: float, spec: Optional[ProblemSpec] = None) -> RateReport:
    """Test the singular-rate bound on the cumulative superlinear mass.

    Hypotheses (when a spec is given): l > max(p, 1) and a kernel bounded away
    from zero.  Q is evaluated over the last decade of (t* - t); absence of a
    significant increasing trend (Z <= 1.645) counts as bounded.
    """
    if l <= 1.0:
        raise HypothesisNotMetError("rate monitor needs l > 1")
    if spec is not None:
        if not (spec.l > max(spec.p, 1.0)):
            raise HypothesisNotMetError("rate monitor needs l > max(p, 1)")
        if spec.kernel_lower_profile().amplitude <= 0.0:
            raise HypothesisNotMetError("rate monitor needs a kernel bounded below")
    gap = t_star - series.t
    usable = gap > 0.0
    if not np.any(usable):
        raise InsufficientWindowError("no samples strictly before the blow-up time")
    gmin = float(np.min(gap[usable]))
    window = usable & (gap <= 10.0 * gmin)
    if int(np.sum(window)) < 8:
        raise InsufficientWindowError(
            f"only {int(np.sum(window))} samples in the terminal decade; need >= 8"
        )
    q = series.cumulative_lp[window] * gap[window] ** (1.0 / (l - 1.0))
    s, z = mann_kendall(q)
    return RateReport(
        sup_q=float(np.max(q)),
        trend_s=s,
        trend_z=z,
        bounded=z <= 1.645,
        window=int(np.sum(window)),
    )


@dataclass(frozen=True)
class LocalizationReport:
    """Boundary-versus-interior comparison near a blow-up."""

    boundary_over_interior: float
    boundary_exceeds_threshold: bool
    envelope_constant: float
    envelope_bounded: bool
    trend_z: float
    hypothesis: str


def localization_monitor(
    series: FunctionalSeries,
    t_star: float,
    spec: ProblemSpec,
    u_cap: float,
    ratio_threshold: float = 10.0,
) -> LocalizationReport:
    """Check that the singularity concentrates on the boundary.

    Requires one of the two hypothesis sets: l > max(p, 1) with a kernel
    bounded below, or p > 1 with absorption bounded below.  The interior band
    maximum must admit a bounded envelope c1 (t* - t)^(-1/(l-1)) while at
    least one boundary series exceeds u_cap / 100.
    """
    l, p = spec.l, spec.p
    kernel_pos = spec.kernel_lower_profile().amplitude > 0.0
    absorption_pos = spec.c.bounds().lower.amplitude > 0.0
    if l > max(p, 1.0) and kernel_pos:
        hypothesis = "superlinear-kernel"
    elif p > 1.0 and absorption_pos:
        hypothesis = "superlinear-absorption"
    else:
        raise HypothesisNotMetError(
            "neither localization hypothesis set holds; raw series left unclassified"
        )

    gap = t_star - series.t
    usable = gap > 0.0
    if int(np.sum(usable)) < 8:
        raise InsufficientWindowError("too few samples before the blow-up time")
    expo = 1.0 / (l - 1.0) if l > 1.0 else 1.0 / (p - 1.0)
    envelope_vals = series.interior_max[usable] * gap[usable] ** expo
    c1 = float(np.max(envelope_vals))
    gmin = float(np.min(gap[usable]))
    terminal = usable & (gap <= 10.0 * gmin)
    if int(np.sum(terminal)) >= 3:
        _, z = mann_kendall(series.interior_max[terminal] * gap[terminal] ** expo)
    else:
        z = 0.0
    boundary_final = max(float(series.boundary_left[-1]), float(series.boundary_right[-1]))
    interior_final = float(series.interior_max[-1])
    ratio = boundary_final / max(interior_final, 1e-300)
    return LocalizationReport(
        boundary_over_interior=ratio,
        boundary_exceeds_threshold=boundary_final >= 1e-2 * u_cap,
        envelope_constant=c1,
        envelope_bounded=z <= 1.645 and math.isfinite(c1),
        trend_z=z,
        hypothesis=hypothesis,
    )

"""Adaptive explicit time integration with blow-up detection.

Explicit Euler with step-doubling local error control: transparent to verify,
and near a singularity the step size collapses anyway, so implicit machinery
would buy nothing.  A compiled kernel handles the separable coefficient
families; a plain-numpy driver with identical control logic serves
manufactured-forcing runs and nonseparable experiments.

Blow-up is declared only when the solution exceeds the cap with the step size
pinned at the floor; a run that stalls at the floor below the cap raises
:class:`~nlheat.errors.NonConvergenceError` instead of being misread as
singular.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numba import njit
from scipy import optimize

from .discretization import Grid, GridState, power
from .discretization import rhs as semi_discrete_rhs
from .errors import FitDegenerateError, NonConvergenceError
from .problem import ProblemSpec, validate

logger = logging.getLogger(__name__)

__all__ = [
    "StepControl",
    "RunKind",
    "BlowupEstimate",
    "Trajectory",
    "RunOutcome",
    "step",
    "run",
    "estimate_blowup_time",
]

_FLOOR_SLACK = 1.0000001


@dataclass(frozen=True)
class StepControl:
    """Step-size policy: error target, floor/cap, and blow-up thresholds."""

    safety: float = 0.8
    dt_max: float = math.inf
    dt_floor: float = 1e-14
    u_cap: float = 1e10
    err_tol: float = 1e-6
    blow_scale: float = 1.0
    fixed_dt: Optional[float] = None
    sample_dt: Optional[float] = None
    sample_growth: float = 1.05
    max_steps: int = 50_000_000
    pin_limit: int = 500_000
    max_samples: int = 4096

    def __post_init__(self):
        if not (0.0 < self.safety <= 1.0):
            raise ValueError("safety must lie in (0, 1]")
        if not (self.dt_floor < self.dt_max):
            raise ValueError("dt_floor must be below dt_max")
        if not (self.u_cap > 1.0):
            raise ValueError("u_cap must exceed 1")

    def to_dict(self) -> dict:
        return {
            "safety": self.safety,
            "dt_max": self.dt_max,
            "dt_floor": self.dt_floor,
            "u_cap": self.u_cap,
            "err_tol": self.err_tol,
            "blow_scale": self.blow_scale,
            "fixed_dt": self.fixed_dt,
            "sample_dt": self.sample_dt,
            "sample_growth": self.sample_growth,
            "max_steps": self.max_steps,
            "pin_limit": self.pin_limit,
            "max_samples": self.max_samples,
        }


class RunKind(str, Enum):
    GLOBAL_TO_HORIZON = "GlobalToHorizon"
    BLOW_UP = "BlowUp"


class Location(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    INTERIOR = "interior"


@dataclass(frozen=True)
class BlowupEstimate:
    """Two-estimator extrapolation of the blow-up time from a max series."""

    t_star: float
    rate_exponent: float
    t_star_power_fit: float
    agreement_gap: float
    window: int


@dataclass
class Trajectory:
    """Sampled scalar series plus full-state snapshots at the same instants."""

    t: np.ndarray
    max_u: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray
    interior_max: np.ndarray
    mass: np.ndarray
    cumulative_lp: np.ndarray
    dt: np.ndarray
    snapshots: np.ndarray
    grid: Grid

    def __len__(self) -> int:
        return len(self.t)

    def state(self, j: int) -> GridState:
        return GridState(t=float(self.t[j]), u=self.snapshots[j])


@dataclass
class RunOutcome:
    """Classification of one trajectory."""

    kind: RunKind
    t_end: float
    trajectory: Trajectory
    t_star_estimate: Optional[float] = None
    rate_exponent: Optional[float] = None
    location: Optional[Location] = None
    steps_accepted: int = 0
    steps_rejected: int = 0
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "t_end": self.t_end,
            "t_star_estimate": self.t_star_estimate,
            "rate_exponent": self.rate_exponent,
            "location": self.location.value if self.location else None,
            "steps_accepted": self.steps_accepted,
            "steps_rejected": self.steps_rejected,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _profile_val(par, t):
    amp = par[1]
    if amp == 0.0:
        return 0.0
    code = par[0]
    v = amp
    if code == 1.0 or code == 3.0:
        v *= math.exp(par[2] * t)
    if code == 2.0 or code == 3.0:
        if par[3] != 0.0:
            v *= (1.0 + t) ** par[3]
        if par[4] != 0.0:
            v *= math.log(math.e + t) ** par[4]
    return v


@njit(cache=True)
def _pow_into(u, e, out):
    n = u.shape[0]
    if e == 1.0:
        for i in range(n):
            out[i] = u[i]
    elif e == 2.0:
        for i in range(n):
            out[i] = u[i] * u[i]
    elif e == 3.0:
        for i in range(n):
            out[i] = u[i] * u[i] * u[i]
    elif e == 0.5:
        for i in range(n):
            out[i] = math.sqrt(u[i])
    elif e == 1.5:
        for i in range(n):
            out[i] = u[i] * math.sqrt(u[i])
    elif e < 1.0:
        for i in range(n):
            out[i] = u[i] ** e if u[i] > 0.0 else 0.0
    else:
        for i in range(n):
            out[i] = u[i] ** e


@njit(cache=True)
def _rhs_kernel(u, t, h, p, l, c_par, c_sp, kl_par, wkl, kr_par, wkr, w, ul, out):
    """out = lap_h u - c u^p with the nonlocal ghost fluxes; returns (g0, gL, S)."""
    n1 = u.shape[0]
    _pow_into(u, l, ul)
    sl = 0.0
    sr = 0.0
    s = 0.0
    for j in range(n1):
        sl += wkl[j] * ul[j]
        sr += wkr[j] * ul[j]
        s += w[j] * ul[j]
    g0 = _profile_val(kl_par, t) * sl
    gl = _profile_val(kr_par, t) * sr
    ih2 = 1.0 / (h * h)
    for i in range(1, n1 - 1):
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * ih2
    out[0] = 2.0 * (u[1] - u[0]) * ih2 + 2.0 * g0 / h
    out[n1 - 1] = 2.0 * (u[n1 - 2] - u[n1 - 1]) * ih2 + 2.0 * gl / h
    cfac = _profile_val(c_par, t)
    if cfac != 0.0:
        if p == 1.0:
            for i in range(n1):
                out[i] -= cfac * c_sp[i] * u[i]
        elif p == 2.0:
            for i in range(n1):
                out[i] -= cfac * c_sp[i] * u[i] * u[i]
        elif p == 3.0:
            for i in range(n1):
                out[i] -= cfac * c_sp[i] * u[i] * u[i] * u[i]
        elif p == 0.5:
            for i in range(n1):
                out[i] -= cfac * c_sp[i] * math.sqrt(u[i])
        elif p < 1.0:
            for i in range(n1):
                if u[i] > 0.0:
                    out[i] -= cfac * c_sp[i] * u[i] ** p
        else:
            for i in range(n1):
                out[i] -= cfac * c_sp[i] * u[i] ** p
    return g0, gl, s


@njit(cache=True)
def _mass_lp(u, l, w, ul):
    n1 = u.shape[0]
    _pow_into(u, l, ul)
    s = 0.0
    for j in range(n1):
        s += w[j] * ul[j]
    return s


@njit(cache=True)
def _drive_kernel(
    u,
    t_start,
    horizon,
    h,
    w,
    p,
    l,
    c_par,
    c_sp,
    kl_par,
    wkl,
    kr_par,
    wkr,
    safety,
    dt_max,
    dt_floor,
    u_cap,
    err_tol,
    blow_scale,
    fixed_dt,
    sample_dt0,
    sample_growth0,
    int_lo,
    int_hi,
    max_steps,
    pin_limit,
    samp_t,
    samp_max,
    samp_left,
    samp_right,
    samp_int,
    samp_mass,
    samp_j,
    samp_dt,
    snapshots,
):
    n1 = u.shape[0]
    ul = np.empty(n1)
    r1 = np.empty(n1)
    r2 = np.empty(n1)
    u_full = np.empty(n1)
    u_half = np.empty(n1)
    u_new = np.empty(n1)

    cap = samp_t.shape[0]
    sample_dt = sample_dt0
    sample_growth = sample_growth0
    growth_exp = 1.0

    dt_stab = safety * h * h / 2.0
    q = p if p > l else l
    t = t_start
    dt = dt_stab if fixed_dt <= 0.0 else fixed_dt
    if dt > dt_max:
        dt = dt_max

    big_j = 0.0
    last_j_t = t
    last_s = -1.0
    steps = 0
    rejected = 0
    pinned_streak = 0
    status = 0
    worst_undershoot = 0.0

    maxu = 0.0
    for i in range(n1):
        if u[i] > maxu:
            maxu = u[i]

    # initial sample
    ns = 0
    samp_t[ns] = t
    samp_max[ns] = maxu
    samp_left[ns] = u[0]
    samp_right[ns] = u[n1 - 1]
    im = 0.0
    for i in range(int_lo, int_hi + 1):
        if u[i] > im:
            im = u[i]
    samp_int[ns] = im
    um = 0.0
    for i in range(n1):
        um += w[i] * u[i]
    samp_mass[ns] = um
    samp_j[ns] = 0.0
    samp_dt[ns] = 0.0
    for i in range(n1):
        snapshots[ns, i] = u[i]
    ns += 1
    last_sample_t = t
    last_sample_max = maxu if maxu > 0.0 else 1e-300

    while t < horizon and status == 0:
        if steps + rejected >= max_steps:
            status = 3
            break
        g0, gl, s_now = _rhs_kernel(
            u, t, h, p, l, c_par, c_sp, kl_par, wkl, kr_par, wkr, w, ul, r1
        )
        ok_r1 = math.isfinite(g0) and math.isfinite(gl)
        if ok_r1:
            for i in range(n1):
                if not math.isfinite(r1[i]):
                    ok_r1 = False
                    break
        if not ok_r1:
            if maxu >= u_cap:
                status = 1
            else:
                status = 2
            break
        if last_s < 0.0:
            last_s = s_now
        if t > last_j_t:
            big_j += (t - last_j_t) * 0.5 * (last_s + s_now)
            last_j_t = t
            last_s = s_now

        accepted = False
        dt_used = 0.0
        while not accepted:
            if fixed_dt > 0.0:
                dt_try = fixed_dt
                if dt_try > horizon - t:
                    dt_try = horizon - t
            else:
                dt_try = dt
                if dt_try > dt_stab:
                    dt_try = dt_stab
                if dt_try > dt_max:
                    dt_try = dt_max
                if dt_try < dt_floor:
                    dt_try = dt_floor
                if dt_try > horizon - t:
                    dt_try = horizon - t

            if fixed_dt > 0.0:
                # plain Euler step, unconditionally accepted
                pre_min = 0.0
                for i in range(n1):
                    v = u[i] + dt_try * r1[i]
                    if v < pre_min:
                        pre_min = v
                    u_new[i] = v if v > 0.0 else 0.0
                err = 0.0
                mx = 0.0
                bad = False
                for i in range(n1):
                    if not math.isfinite(u_new[i]):
                        bad = True
                        break
                    if u_new[i] > mx:
                        mx = u_new[i]
                if bad:
                    status = 2
                    break
                accepted = True
                dt_used = dt_try
                if mx > 0.0 and pre_min < -1e-10 * mx:
                    ratio = pre_min / mx
                    if ratio < worst_undershoot:
                        worst_undershoot = ratio
                break

            # step doubling: one full step against two half steps
            bad = False
            pre_min = 0.0
            half = 0.5 * dt_try
            for i in range(n1):
                v = u[i] + dt_try * r1[i]
                u_full[i] = v if v > 0.0 else 0.0
                vh = u[i] + half * r1[i]
                u_half[i] = vh if vh > 0.0 else 0.0
            _rhs_kernel(
                u_half, t + half, h, p, l, c_par, c_sp, kl_par, wkl, kr_par, wkr, w, ul, r2
            )
            for i in range(n1):
                v = u_half[i] + half * r2[i]
                if v < pre_min:
                    pre_min = v
                u_new[i] = v if v > 0.0 else 0.0

            err = 0.0
            mx = 0.0
            for i in range(n1):
                if not (math.isfinite(u_new[i]) and math.isfinite(u_full[i])):
                    bad = True
                    break
                d = u_new[i] - u_full[i]
                if d < 0.0:
                    d = -d
                if d > err:
                    err = d
                if u_new[i] > mx:
                    mx = u_new[i]

            at_floor = dt_try <= dt_floor * _FLOOR_SLACK
            if bad:
                if at_floor:
                    status = 1 if maxu >= u_cap else 2
                    break
                dt = dt_try * 0.25
                if dt < dt_floor:
                    dt = dt_floor
                rejected += 1
                continue

            tol = err_tol * (mx if mx > 1.0 else 1.0)
            if err <= tol or at_floor:
                accepted = True
                dt_used = dt_try
                if mx > 0.0 and pre_min < -1e-10 * mx:
                    ratio = pre_min / mx
                    if ratio < worst_undershoot:
                        worst_undershoot = ratio
                # next step size from the error controller
                if err > 0.0:
                    fac = safety * math.sqrt(tol / err)
                    if fac < 0.2:
                        fac = 0.2
                    elif fac > 5.0:
                        fac = 5.0
                else:
                    fac = 5.0
                dt = dt_try * fac
                if q > 1.0 and mx > 1.0:
                    cap_dt = blow_scale * mx ** (1.0 - q)
                    if dt > cap_dt:
                        dt = cap_dt
                if dt < dt_floor:
                    dt = dt_floor
            else:
                fac = safety * math.sqrt(tol / err)
                if fac < 0.1:
                    fac = 0.1
                elif fac > 0.5:
                    fac = 0.5
                dt = dt_try * fac
                if dt < dt_floor:
                    dt = dt_floor
                rejected += 1

        if status != 0:
            break

        # commit
        for i in range(n1):
            u[i] = u_new[i]
        t += dt_used
        steps += 1
        maxu = mx
        at_floor_used = dt_used <= dt_floor * 10.0
        if dt_used <= dt_floor * _FLOOR_SLACK:
            pinned_streak += 1
        else:
            pinned_streak = 0

        want_sample = (
            t - last_sample_t >= sample_dt
            or maxu >= sample_growth * last_sample_max
            or t >= horizon
            or (maxu >= u_cap and at_floor_used)
        )
        if want_sample:
            if ns >= cap:
                # deterministic thinning: keep every other sample
                keep = cap // 2
                for j in range(keep):
                    src = 2 * j
                    samp_t[j] = samp_t[src]
                    samp_max[j] = samp_max[src]
                    samp_left[j] = samp_left[src]
                    samp_right[j] = samp_right[src]
                    samp_int[j] = samp_int[src]
                    samp_mass[j] = samp_mass[src]
                    samp_j[j] = samp_j[src]
                    samp_dt[j] = samp_dt[src]
                    for i in range(n1):
                        snapshots[j, i] = snapshots[src, i]
                ns = keep
                sample_dt *= 2.0
                growth_exp *= 2.0
                sample_growth = sample_growth0**growth_exp
            samp_t[ns] = t
            samp_max[ns] = maxu
            samp_left[ns] = u[0]
            samp_right[ns] = u[n1 - 1]
            im = 0.0
            for i in range(int_lo, int_hi + 1):
                if u[i] > im:
                    im = u[i]
            samp_int[ns] = im
            um = 0.0
            for i in range(n1):
                um += w[i] * u[i]
            samp_mass[ns] = um
            s_here = _mass_lp(u, l, w, ul)
            samp_j[ns] = big_j + (t - last_j_t) * 0.5 * (last_s + s_here)
            samp_dt[ns] = dt_used
            for i in range(n1):
                snapshots[ns, i] = u[i]
            ns += 1
            last_sample_t = t
            last_sample_max = maxu if maxu > 0.0 else 1e-300

        if maxu >= u_cap and at_floor_used:
            status = 1
            break
        if pinned_streak >= pin_limit and maxu < u_cap:
            status = 2
            break

    return status, t, steps, rejected, ns, worst_undershoot


# ---------------------------------------------------------------------------
# python driver (manufactured forcing, nonseparable experiments)
# ---------------------------------------------------------------------------


def _drive_python(u, t_start, horizon, grid, spec, ctrl, forcing, buffers):
    """Same control logic as the compiled kernel, in plain numpy."""
    (samp_t, samp_max, samp_left, samp_right, samp_int, samp_mass, samp_j, samp_dt, snapshots) = buffers
    n1 = u.shape[0]
    h = grid.h
    w = grid.weights
    xs = grid.nodes
    band = grid.interior_band()
    p, l = spec.p, spec.l
    kl_sp = spec.k_left.spatial.sample(xs) if spec.k_left.spatial else np.ones(n1)
    kr_sp = spec.k_right.spatial.sample(xs) if spec.k_right.spatial else np.ones(n1)
    c_sp = spec.c.spatial.sample(xs) if spec.c.spatial else np.ones(n1)
    wkl = w * kl_sp
    wkr = w * kr_sp

    def rhs_np(uu, tt):
        ul = power(uu, l)
        g0 = spec.k_left.time_value(tt) * float(np.dot(wkl, ul))
        gl = spec.k_right.time_value(tt) * float(np.dot(wkr, ul))
        out = np.empty_like(uu)
        out[1:-1] = (uu[:-2] - 2.0 * uu[1:-1] + uu[2:]) / (h * h)
        out[0] = 2.0 * (uu[1] - uu[0]) / (h * h) + 2.0 * g0 / h
        out[-1] = 2.0 * (uu[-2] - uu[-1]) / (h * h) + 2.0 * gl / h
        cfac = spec.c.time_value(tt)
        if cfac != 0.0:
            out -= cfac * c_sp * power(uu, p)
        if forcing is not None:
            out += forcing(xs, tt)
        s = float(np.dot(w, ul))
        return out, g0, gl, s

    fixed_dt = ctrl.fixed_dt or 0.0
    dt_stab = ctrl.safety * h * h / 2.0
    q = max(p, l)
    t = t_start
    dt = min(dt_stab, ctrl.dt_max) if fixed_dt <= 0.0 else fixed_dt
    sample_dt = ctrl.sample_dt if ctrl.sample_dt is not None else max(horizon - t_start, 1e-300) / 512.0
    sample_growth = ctrl.sample_growth
    cap = samp_t.shape[0]

    big_j, last_j_t, last_s = 0.0, t, -1.0
    steps = rejected = pinned = 0
    status = 0
    worst_undershoot = 0.0
    maxu = float(np.max(u))

    def record(ns, tt, mx, dtu):
        samp_t[ns] = tt
        samp_max[ns] = mx
        samp_left[ns] = u[0]
        samp_right[ns] = u[-1]
        samp_int[ns] = float(np.max(u[band]))
        samp_mass[ns] = float(np.dot(w, u))
        s_here = float(np.dot(w, power(u, l)))
        samp_j[ns] = big_j + (tt - last_j_t) * 0.5 * ((last_s if last_s >= 0 else s_here) + s_here)
        samp_dt[ns] = dtu
        snapshots[ns] = u
        return ns + 1

    ns = record(0, t, maxu, 0.0)
    last_sample_t, last_sample_max = t, max(maxu, 1e-300)

    with np.errstate(over="ignore", invalid="ignore"):
        while t < horizon and status == 0:
            if steps + rejected >= ctrl.max_steps:
                status = 3
                break
            r1, g0, gl, s_now = rhs_np(u, t)
            if not np.all(np.isfinite(r1)):
                status = 1 if maxu >= ctrl.u_cap else 2
                break
            if last_s < 0.0:
                last_s = s_now
            if t > last_j_t:
                big_j += (t - last_j_t) * 0.5 * (last_s + s_now)
                last_j_t, last_s = t, s_now

            accepted = False
            dt_used = 0.0
            while not accepted:
                if fixed_dt > 0.0:
                    dt_try = min(fixed_dt, horizon - t)
                    u_new = np.maximum(u + dt_try * r1, 0.0)
                    pre_min = float(np.min(u + dt_try * r1))
                    if not np.all(np.isfinite(u_new)):
                        status = 2
                        break
                    mx = float(np.max(u_new))
                    accepted, dt_used = True, dt_try
                    break
                dt_try = min(dt, dt_stab, ctrl.dt_max, horizon - t)
                dt_try = max(dt_try, min(ctrl.dt_floor, horizon - t))
                half = 0.5 * dt_try
                u_full = np.maximum(u + dt_try * r1, 0.0)
                u_half = np.maximum(u + half * r1, 0.0)
                r2 = rhs_np(u_half, t + half)[0]
                raw = u_half + half * r2
                pre_min = float(np.min(raw)) if np.all(np.isfinite(raw)) else 0.0
                u_new = np.maximum(raw, 0.0)
                at_floor = dt_try <= ctrl.dt_floor * _FLOOR_SLACK
                if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(u_full))):
                    if at_floor:
                        status = 1 if maxu >= ctrl.u_cap else 2
                        break
                    dt = max(dt_try * 0.25, ctrl.dt_floor)
                    rejected += 1
                    continue
                err = float(np.max(np.abs(u_new - u_full)))
                mx = float(np.max(u_new))
                tol = ctrl.err_tol * max(1.0, mx)
                if err <= tol or at_floor:
                    accepted, dt_used = True, dt_try
                    fac = ctrl.safety * math.sqrt(tol / err) if err > 0.0 else 5.0
                    dt = dt_try * min(5.0, max(0.2, fac))
                    if q > 1.0 and mx > 1.0:
                        dt = min(dt, ctrl.blow_scale * mx ** (1.0 - q))
                    dt = max(dt, ctrl.dt_floor)
                else:
                    fac = min(0.5, max(0.1, ctrl.safety * math.sqrt(tol / err)))
                    dt = max(dt_try * fac, ctrl.dt_floor)
                    rejected += 1
            if status != 0:
                break

            if mx > 0.0 and pre_min < -1e-10 * mx:
                worst_undershoot = min(worst_undershoot, pre_min / mx)
            u[:] = u_new
            t += dt_used
            steps += 1
            maxu = mx
            at_floor_used = dt_used <= ctrl.dt_floor * 10.0
            pinned = pinned + 1 if dt_used <= ctrl.dt_floor * _FLOOR_SLACK else 0

            if (
                t - last_sample_t >= sample_dt
                or maxu >= sample_growth * last_sample_max
                or t >= horizon
                or (maxu >= ctrl.u_cap and at_floor_used)
            ):
                if ns >= cap:
                    keep = cap // 2
                    for arr in (samp_t, samp_max, samp_left, samp_right, samp_int, samp_mass, samp_j, samp_dt):
                        arr[:keep] = arr[0 : 2 * keep : 2]
                    snapshots[:keep] = snapshots[0 : 2 * keep : 2]
                    ns = keep
                    sample_dt *= 2.0
                    sample_growth = sample_growth**2
                ns = record(ns, t, maxu, dt_used)
                last_sample_t, last_sample_max = t, max(maxu, 1e-300)

            if maxu >= ctrl.u_cap and at_floor_used:
                status = 1
                break
            if pinned >= ctrl.pin_limit and maxu < ctrl.u_cap:
                status = 2
                break

    return status, t, steps, rejected, ns, worst_undershoot


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def step(state: GridState, dt: float, spec: ProblemSpec, grid: Grid, forcing=None) -> GridState:
    """One explicit Euler step with nonnegativity clamping.

    The caller owns the stability precondition dt <= safety * h^2 / 2.
    """
    out = state.u + dt * semi_discrete_rhs(state, spec, grid, forcing)
    if not np.all(np.isfinite(out)):
        raise OverflowError("state overflowed within a single step")
    return GridState(t=state.t + dt, u=np.maximum(out, 0.0))


def _coeff_param_vector(desc) -> np.ndarray:
    rho, alpha, beta = desc._exponents()
    return np.array([float(desc.kind_code), desc.amplitude, rho, alpha, beta])


def run(
    spec: ProblemSpec,
    grid: Grid,
    ctrl: StepControl,
    horizon: float,
    forcing: Optional[Callable] = None,
    driver: str = "auto",
) -> RunOutcome:
    """Integrate to the horizon or to a declared blow-up.

    Deterministic: identical inputs reproduce the trajectory bit for bit
    within a driver.  Raises :class:`NonConvergenceError` when the step size
    stalls at the floor below the blow-up cap or the step budget runs out.
    """
    report = validate(spec)
    report.raise_if_invalid()
    run_warnings = list(report.warnings)

    if not (horizon > 0.0):
        raise ValueError("horizon must be positive")
    if ctrl.fixed_dt is not None and ctrl.fixed_dt > grid.h * grid.h / 2.0:
        raise ValueError("fixed_dt violates the explicit stability bound h^2/2")

    n1 = grid.n + 1
    u = np.ascontiguousarray(np.maximum(spec.u0.value(grid.nodes), 0.0))
    cap = ctrl.max_samples
    samp = [np.zeros(cap) for _ in range(8)]
    snapshots = np.zeros((cap, n1))
    band = grid.interior_band()

    use_python = driver == "python" or forcing is not None
    if driver == "numba" and forcing is not None:
        raise ValueError("the compiled driver does not take a forcing hook")

    if use_python:
        status, t_end, steps, rejected, ns, undershoot = _drive_python(
            u, 0.0, horizon, grid, spec, ctrl, forcing, (*samp, snapshots)
        )
    else:
        xs = grid.nodes
        w = grid.weights
        kl_sp = spec.k_left.spatial.sample(xs) if spec.k_left.spatial else np.ones(n1)
        kr_sp = spec.k_right.spatial.sample(xs) if spec.k_right.spatial else np.ones(n1)
        c_sp = spec.c.spatial.sample(xs) if spec.c.spatial else np.ones(n1)
        sample_dt = ctrl.sample_dt if ctrl.sample_dt is not None else horizon / 512.0
        status, t_end, steps, rejected, ns, undershoot = _drive_kernel(
            u,
            0.0,
            horizon,
            grid.h,
            w,
            spec.p,
            spec.l,
            _coeff_param_vector(spec.c),
            np.ascontiguousarray(c_sp),
            _coeff_param_vector(spec.k_left),
            np.ascontiguousarray(w * kl_sp),
            _coeff_param_vector(spec.k_right),
            np.ascontiguousarray(w * kr_sp),
            ctrl.safety,
            ctrl.dt_max,
            ctrl.dt_floor,
            ctrl.u_cap,
            ctrl.err_tol,
            ctrl.blow_scale,
            ctrl.fixed_dt or 0.0,
            sample_dt,
            ctrl.sample_growth,
            band.start,
            band.stop - 1,
            ctrl.max_steps,
            ctrl.pin_limit,
            *samp,
            snapshots,
        )

    logger.debug(
        "drive finished: status=%d t_end=%.6g steps=%d rejected=%d samples=%d",
        status,
        t_end,
        steps,
        rejected,
        ns,
    )
    traj = Trajectory(
        t=samp[0][:ns].copy(),
        max_u=samp[1][:ns].copy(),
        u_left=samp[2][:ns].copy(),
        u_right=samp[3][:ns].copy(),
        interior_max=samp[4][:ns].copy(),
        mass=samp[5][:ns].copy(),
        cumulative_lp=samp[6][:ns].copy(),
        dt=samp[7][:ns].copy(),
        snapshots=snapshots[:ns].copy(),
        grid=grid,
    )

    if undershoot < -1e-10:
        run_warnings.append(
            f"scheme-quality: clamped negative undershoot of relative size {undershoot:.3e}"
        )

    if status == 2:
        raise NonConvergenceError(
            f"step size stalled at the floor near t = {t_end:.6g} without reaching the cap",
            trajectory=traj,
        )
    if status == 3:
        raise NonConvergenceError(
            f"step budget {ctrl.max_steps} exhausted at t = {t_end:.6g}", trajectory=traj
        )

    if status == 1:
        t_star = rate = None
        try:
            est = estimate_blowup_time(traj.t, traj.max_u, spec.l if spec.l > 1.0 else max(spec.p, 1.5))
            t_star, rate = est.t_star, est.rate_exponent
        except FitDegenerateError as exc:
            run_warnings.append(f"blow-up time extrapolation degenerate: {exc}")
            t_star = t_end
        final = traj.snapshots[-1]
        x_star = float(np.argmax(final)) * grid.h
        if 0.25 * grid.length <= x_star <= 0.75 * grid.length:
            loc = Location.INTERIOR
        else:
            loc = Location.LEFT if x_star < 0.5 * grid.length else Location.RIGHT
        return RunOutcome(
            kind=RunKind.BLOW_UP,
            t_end=t_end,
            trajectory=traj,
            t_star_estimate=t_star,
            rate_exponent=rate,
            location=loc,
            steps_accepted=steps,
            steps_rejected=rejected,
            warnings=tuple(run_warnings),
        )

    return RunOutcome(
        kind=RunKind.GLOBAL_TO_HORIZON,
        t_end=t_end,
        trajectory=traj,
        steps_accepted=steps,
        steps_rejected=rejected,
        warnings=tuple(run_warnings),
    )


def estimate_blowup_time(times, values, l: float, window: int = 48) -> BlowupEstimate:
    """Extrapolate the blow-up time from a terminal max-value series.

    Two estimators: the rate-specific one extrapolates values**(-(l-1)) to its
    linear zero crossing; the generic one least-squares fits log(values)
    against log(T - t) over candidate T.  Their gap is reported so disagreement
    is visible instead of averaged away.
    """
    t = np.asarray(times, dtype=float)
    m = np.asarray(values, dtype=float)
    if len(t) != len(m) or len(t) < 2:
        raise FitDegenerateError("need matching series with at least two samples")

    # longest strictly increasing suffix
    idx = len(m) - 1
    while idx > 0 and m[idx - 1] < m[idx]:
        idx -= 1
    tail_t = t[idx:]
    tail_m = m[idx:]
    if len(tail_m) < 8:
        raise FitDegenerateError(
            f"terminal window has {len(tail_m)} strictly increasing samples; need >= 8"
        )
    tail_t = tail_t[-window:]
    tail_m = tail_m[-window:]

    kappa = l - 1.0
    if kappa <= 0.0:
        raise FitDegenerateError("rate-specific estimator needs l > 1")
    y = tail_m**(-kappa)
    slope, intercept = np.polyfit(tail_t, y, 1)
    if not slope < 0.0:
        raise FitDegenerateError("transformed series is not decreasing toward zero")
    t_star = float(-intercept / slope)
    if t_star <= tail_t[-1]:
        t_star = float(tail_t[-1]) + 1e-30

    # generic power fit over candidate blow-up times
    logm = np.log(tail_m)
    t_last = float(tail_t[-1])
    span = max(t_last - float(tail_t[0]), 1e-30)

    def sse(T):
        z = np.log(T - tail_t)
        a, b = np.polyfit(z, logm, 1)
        resid = logm - (a * z + b)
        return float(np.dot(resid, resid))

    res = optimize.minimize_scalar(
        sse,
        bounds=(t_last + 1e-12 * max(t_last, 1.0), t_last + 4.0 * span),
        method="bounded",
        options={"xatol": 1e-14 * max(t_last, 1.0)},
    )
    t_star_power = float(res.x)
    beta = float(-np.polyfit(np.log(t_star_power - tail_t), logm, 1)[0])

    return BlowupEstimate(
        t_star=t_star,
        rate_exponent=beta,
        t_star_power_fit=t_star_power,
        agreement_gap=abs(t_star - t_star_power),
        window=len(tail_m),
    )

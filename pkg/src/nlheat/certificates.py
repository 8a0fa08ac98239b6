"""Explicit comparison certificates: construction, feasibility search, checking.

A certificate is a closed-form candidate super- or subsolution together with
its free constants.  Builders choose constants by logarithmic grid scan with
early exit (feasibility, not tightness, is the goal), leave a multiplicative
margin so floating-point and O(h^2) discretization error cannot flip a
genuinely satisfied inequality, and self-verify on the grid before returning.
Time derivatives are analytic for every closed form; a central-difference
cross-check is available as a separate utility.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .coefficients import TimeProfile
from .discretization import Grid, GridState, boundary_flux, power
from .errors import (
    CertificateInfeasibleError,
    HypothesisNotMetError,
    InvalidProblemError,
    SandwichViolationError,
)
from .problem import LEFT, RIGHT, ProblemSpec
from .timestepper import Trajectory

__all__ = [
    "EigenPair",
    "PsiSolution",
    "CertificateKind",
    "Certificate",
    "ResidualReport",
    "SandwichReport",
    "CollarReport",
    "solve_eigenpair",
    "solve_psi",
    "build_eigen_supersolution",
    "build_boundary_layer_supersolution",
    "build_ode_bound",
    "build_psi_profile_subsolution",
    "build_collar_subsolution",
    "scan_collar_subsolution",
    "make_constant_certificate",
    "make_zero_certificate",
    "check_certificate",
    "check_collar_subsolution",
    "verify_time_derivative",
    "sandwich_test",
]

_MARGIN = 1.05


# ---------------------------------------------------------------------------
# auxiliary elliptic profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenPair:
    """First Dirichlet eigenpair of the interval, sampled on a grid.

    On (0, L) the closed form is lambda1 = (pi/L)^2 and phi = sin(pi x / L)
    with sup phi = 1; the normal derivative at both endpoints is -pi/L.
    """

    lambda1: float
    phi: np.ndarray
    normal_derivative: tuple[float, float]
    grid: Grid

    def phi_at(self, x):
        return np.sin(math.pi * np.asarray(x, dtype=float) / self.grid.length)

    def grad_phi_at(self, x):
        w = math.pi / self.grid.length
        return w * np.cos(w * np.asarray(x, dtype=float))


def solve_eigenpair(grid: Grid) -> EigenPair:
    lam = (math.pi / grid.length) ** 2
    phi = np.sin(math.pi * grid.nodes / grid.length)
    slope = math.pi / grid.length
    return EigenPair(lambda1=lam, phi=phi, normal_derivative=(-slope, -slope), grid=grid)


@dataclass(frozen=True)
class PsiSolution:
    """Quadratic bump with unit Laplacian and flux |domain|/|boundary| outward.

    psi(x) = (x^2 - L x)/2 + K, positive iff K > L^2 / 8; inf psi = K - L^2/8
    at the midpoint and sup psi = K at the endpoints.
    """

    psi: np.ndarray
    additive_constant: float
    b: float
    sup_psi: float
    grid: Grid

    def psi_at(self, x):
        x = np.asarray(x, dtype=float)
        return (x * x - self.grid.length * x) / 2.0 + self.additive_constant

    def lp_mass(self, l: float) -> float:
        return float(np.dot(self.grid.weights, power(self.psi, l)))


def solve_psi(grid: Grid, additive_constant: float) -> PsiSolution:
    L = grid.length
    b = additive_constant - L * L / 8.0
    if not (b > 0.0):
        raise InvalidProblemError(
            f"additive constant {additive_constant} does not keep the profile positive "
            f"(needs > {L * L / 8.0})"
        )
    x = grid.nodes
    psi = (x * x - L * x) / 2.0 + additive_constant
    return PsiSolution(
        psi=psi, additive_constant=additive_constant, b=b, sup_psi=additive_constant, grid=grid
    )


# ---------------------------------------------------------------------------
# certificate container
# ---------------------------------------------------------------------------


class CertificateKind(str, Enum):
    EIGEN_SUPER = "EigenSuper"
    BOUNDARY_LAYER_SUPER = "BoundaryLayerSuper"
    ODE_SUB = "OdeSub"
    ODE_SUPER = "OdeSuper"
    PSI_PROFILE_SUPER = "PsiProfileSuper"
    PSI_PROFILE_SUB = "PsiProfileSub"
    TRAVELING_SUB = "TravelingSub"


@dataclass
class Certificate:
    """Closed-form comparison candidate with recorded constants and gates."""

    kind: CertificateKind
    constants: dict
    window: tuple[float, float]
    evaluate: Callable[[np.ndarray, float], np.ndarray]
    time_derivative: Callable[[np.ndarray, float], np.ndarray]
    normal_derivative: Callable[[str, float], float]
    gates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "constants": {k: v for k, v in self.constants.items()},
            "window": list(self.window),
            "gates": {k: v for k, v in self.gates.items()},
        }


@dataclass(frozen=True)
class ResidualReport:
    """Direction-adjusted residual minima; nonnegative (up to tol) means pass.

    interior_min is the worst of v_t - lap_h v + c v^p over interior nodes and
    sampled times (sign flipped for subsolutions), boundary_min the worst flux
    inequality margin at the endpoints, initial_min the worst initial-datum
    margin.  Each check carries its own scale-aware tolerance.
    """

    interior_min: float
    boundary_min: float
    initial_min: float
    passed: bool
    tol_interior: float
    tol_boundary: float
    tol_initial: float
    worst_interior: tuple[float, float]
    worst_boundary: tuple[str, float]
    worst_initial: float
    failing: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "interior_min": self.interior_min,
            "boundary_min": self.boundary_min,
            "initial_min": self.initial_min,
            "passed": self.passed,
            "failing": list(self.failing),
        }


def check_certificate(
    cert: Certificate,
    spec: ProblemSpec,
    grid: Grid,
    time_window: Optional[tuple[float, float]] = None,
    direction: str = "super",
    nt: int = 33,
    initial_values: Optional[np.ndarray] = None,
) -> ResidualReport:
    """Evaluate the three defining inequalities of a candidate on the grid.

    For a supersolution the interior check is v_t - lap_h v + c v^p >= 0, the
    boundary check dv/dnu >= nonlocal flux, and the initial check
    v(., t0) >= u0.  Signs flip for direction="sub".  Failure never raises;
    the report localizes the worst offending point per check.
    """
    if direction not in ("super", "sub"):
        raise ValueError("direction must be 'super' or 'sub'")
    sign = 1.0 if direction == "super" else -1.0
    t0, t1 = time_window if time_window is not None else cert.window
    xs = grid.nodes
    h2 = grid.h * grid.h
    times = np.linspace(t0, t1, nt)

    interior_min = math.inf
    boundary_min = math.inf
    scale_interior = 0.0
    scale_boundary = 0.0
    worst_interior = (math.nan, math.nan)
    worst_boundary = ("", math.nan)

    for t in times:
        v = np.asarray(cert.evaluate(xs, float(t)), dtype=float)
        vt = np.asarray(cert.time_derivative(xs, float(t)), dtype=float)
        lap = (v[:-2] - 2.0 * v[1:-1] + v[2:]) / h2
        cvals = spec.c.value(xs, float(t)) * np.ones_like(xs)
        absorb = cvals * power(v, spec.p)
        resid = sign * (vt[1:-1] - lap + absorb[1:-1])
        j = int(np.argmin(resid))
        if resid[j] < interior_min:
            interior_min = float(resid[j])
            worst_interior = (float(xs[j + 1]), float(t))
        scale_interior = max(
            scale_interior,
            float(np.max(np.abs(vt[1:-1]) + np.abs(lap) + np.abs(absorb[1:-1]))),
        )

        state = GridState(t=float(t), u=np.maximum(v, 0.0))
        for end, name in ((LEFT, "left"), (RIGHT, "right")):
            flux = boundary_flux(state, spec, end, grid)
            normal = cert.normal_derivative(end, float(t))
            margin = sign * (normal - flux)
            if margin < boundary_min:
                boundary_min = float(margin)
                worst_boundary = (name, float(t))
            scale_boundary = max(scale_boundary, abs(normal), abs(flux))

    v0 = np.asarray(cert.evaluate(xs, t0), dtype=float)
    u0 = initial_values if initial_values is not None else spec.u0.value(xs)
    init = sign * (v0 - u0)
    j0 = int(np.argmin(init))
    initial_min = float(init[j0])
    scale_initial = float(max(np.max(np.abs(v0)), np.max(np.abs(u0))))

    tol_interior = 1e-8 + 1e-6 * scale_interior
    tol_boundary = 1e-8 + 1e-6 * scale_boundary
    tol_initial = 1e-8 + 1e-6 * scale_initial
    failing = tuple(
        name
        for name, val, tol in (
            ("interior", interior_min, tol_interior),
            ("boundary", boundary_min, tol_boundary),
            ("initial", initial_min, tol_initial),
        )
        if not val >= -tol
    )
    return ResidualReport(
        interior_min=interior_min,
        boundary_min=boundary_min,
        initial_min=initial_min,
        passed=not failing,
        tol_interior=tol_interior,
        tol_boundary=tol_boundary,
        tol_initial=tol_initial,
        worst_interior=worst_interior,
        worst_boundary=worst_boundary,
        worst_initial=float(xs[j0]),
        failing=failing,
    )


def verify_time_derivative(
    cert: Certificate, grid: Grid, time_window: Optional[tuple[float, float]] = None, nt: int = 9, tol: float = 1e-4
) -> float:
    """Cross-check the analytic time derivative by central differences.

    Returns the worst absolute discrepancy, scaled by max(1, |v_t|); raises
    when it exceeds tol.  Sample points stay strictly inside the window so
    closed forms with extinction kinks are differentiated on smooth stretches.
    """
    t0, t1 = time_window if time_window is not None else cert.window
    span = t1 - t0
    dt = 1e-6 * max(span, 1.0)
    xs = grid.nodes
    worst = 0.0
    for t in np.linspace(t0 + 2 * dt, t1 - 2 * dt, nt):
        fd = (np.asarray(cert.evaluate(xs, t + dt)) - np.asarray(cert.evaluate(xs, t - dt))) / (2 * dt)
        an = np.asarray(cert.time_derivative(xs, t))
        err = float(np.max(np.abs(fd - an) / np.maximum(1.0, np.abs(an))))
        worst = max(worst, err)
    if worst > tol:
        raise InvalidProblemError(f"analytic time derivative off by {worst:.3e} (> {tol})")
    return worst


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _kernel_sup_on_window(spec: ProblemSpec, window: tuple[float, float]) -> float:
    lo, hi = window
    return max(
        spec.k_left.profile().scaled(spec.k_left.spatial_bounds()[1]).sup_on(lo, hi),
        spec.k_right.profile().scaled(spec.k_right.spatial_bounds()[1]).sup_on(lo, hi),
    )


def build_eigen_supersolution(
    spec: ProblemSpec, eig: EigenPair, window: tuple[float, float] = (0.0, 10.0)
) -> Certificate:
    """Separable decaying-profile supersolution for sublinear coupling (l <= 1).

    The three displayed constant inequalities are evaluated with grid maxima
    and trapezoid quadrature, each with a 5% margin so the grid residual check
    cannot fail on roundoff.
    """
    if spec.l > 1.0:
        raise HypothesisNotMetError("eigen supersolution construction needs l <= 1")
    grid = eig.grid
    L = grid.length
    l = spec.l
    kmax = _kernel_sup_on_window(spec, window)
    quad_term = float(np.dot(grid.weights, (eig.phi + 1.0) ** (-l)))
    min_slope = -max(eig.normal_derivative)  # = pi / L
    a = _MARGIN * max(kmax * quad_term / min_slope, 1.0)
    u0_vals = spec.u0.value(grid.nodes)
    c_const = _MARGIN * max(float(np.max((a * eig.phi + 1.0) * u0_vals)), 1.0)
    grad_ratio = float(np.max(eig.grad_phi_at(grid.nodes) ** 2 / (a * eig.phi + 1.0) ** 2))
    mu = _MARGIN * (eig.lambda1 + 2.0 * a * a * grad_ratio)

    length = L

    def evaluate(x, t):
        phi = np.sin(math.pi * np.asarray(x, dtype=float) / length)
        return c_const * math.exp(mu * t) / (a * phi + 1.0)

    def time_derivative(x, t):
        return mu * evaluate(x, t)

    def normal_derivative(end, t):
        return a * c_const * math.exp(mu * t) * (math.pi / length)

    return Certificate(
        kind=CertificateKind.EIGEN_SUPER,
        constants={"a": a, "C": c_const, "mu": mu, "kernel_sup": kmax, "quad_term": quad_term},
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"l_le_1": True, "kernel_bounded": math.isfinite(kmax)},
    )


def _layer_profile_functions(alpha, eps, omega, beta, gamma, A, length):
    """The static boundary-layer profile and its exact second s-derivative."""
    expo = beta / gamma

    def base(s):
        return np.maximum((alpha * s + eps) ** (-gamma) - omega ** (-gamma), 0.0)

    def value(x):
        s = np.minimum(x, length - x)
        return base(s) ** expo + A

    def second_derivative(x):
        s = np.minimum(x, length - x)
        b = base(s)
        core = alpha * s + eps
        with np.errstate(invalid="ignore"):
            t1 = alpha**2 * beta * (gamma + 1.0) * core ** (-gamma - 2.0) * b ** ((beta - gamma) / gamma)
            t2 = alpha**2 * beta * (beta - gamma) * core ** (-2.0 * gamma - 2.0) * b ** ((beta - 2.0 * gamma) / gamma)
        out = np.where(b > 0.0, t1 + t2, 0.0)
        return out

    def normal_slope():
        b0 = eps ** (-gamma) - omega ** (-gamma)
        if b0 <= 0.0:
            return 0.0
        return alpha * beta * eps ** (-gamma - 1.0) * b0 ** ((beta - gamma) / gamma)

    return value, second_derivative, normal_slope


def build_boundary_layer_supersolution(
    spec: ProblemSpec,
    grid: Grid,
    window: tuple[float, float] = (0.0, 10.0),
    eps_scan: int = 40,
    alpha_scan: int = 25,
) -> Certificate:
    """Static collar supersolution for superlinear coupling beaten by absorption.

    Standard construction for 1 < l < p with positive absorption; for l = p
    the borderline profile exponent applies and feasibility additionally
    requires a large absorption/kernel ratio, searched over the collar slope.
    """
    p, l = spec.p, spec.l
    if l <= 1.0 or l > p:
        raise HypothesisNotMetError(
            "boundary-layer supersolution needs 1 < l < p (or l = p with a large ratio)"
        )
    borderline = l == p
    c_lower = spec.c.bounds().lower
    c_min = c_lower.inf_on(*window)
    if not (c_min > 0.0):
        raise HypothesisNotMetError("construction needs absorption bounded below by a positive constant")

    L = grid.length
    if borderline:
        beta = 2.0 / (l - 1.0)
        alphas = np.logspace(-1.5, 2.0, alpha_scan)
    else:
        lo = max(1.0 / l, 2.0 / (p - 1.0))
        hi = 2.0 / (l - 1.0)
        if not lo < hi:
            raise HypothesisNotMetError("empty profile-exponent window for these (p, l)")
        beta = 0.5 * (lo + hi)
        alphas = np.logspace(0.0, -2.0, 9)
    gamma = beta / 4.0
    delta = L / 4.0
    u0_max = float(np.max(spec.u0.value(grid.nodes)))
    a_floor = _MARGIN * max(u0_max, 1.0)
    kmax = _kernel_sup_on_window(spec, window)
    xs = grid.nodes
    w = grid.weights

    # plateau growth is part of the construction: raising it relaxes the
    # interior inequality mid-layer while the wall slope absorbs the flux
    for a_mult in (1.0, 4.0, 16.0, 64.0, 256.0):
        A = a_floor * a_mult
        for alpha in alphas:
            omega = alpha * delta / 2.0
            for eps in omega * np.logspace(-0.05, -5.0, eps_scan):
                value, second, slope = _layer_profile_functions(alpha, eps, omega, beta, gamma, A, L)
                prof = value(xs)
                curv = second(xs)
                # interior inequality with doubled-amplitude headroom
                interior_ok = np.all(c_min * power(prof - A + 2.0 * A, p) >= _MARGIN * curv)
                if not interior_ok:
                    continue
                flux_headroom = kmax * float(np.dot(w, power(prof - A + 2.0 * A, l)))
                if slope() < _MARGIN * flux_headroom:
                    continue
                cert = _finish_layer_certificate(alpha, eps, omega, beta, gamma, A, L, window)
                report = check_certificate(cert, spec, grid, window, "super")
                if report.passed:
                    return cert
    raise CertificateInfeasibleError(
        "no admissible collar profile found in the scan range "
        f"(p={p}, l={l}, c_min={c_min:.3g}, kernel sup={kmax:.3g})"
    )


def _finish_layer_certificate(alpha, eps, omega, beta, gamma, A, length, window):
    value, second, slope = _layer_profile_functions(alpha, eps, omega, beta, gamma, A, length)
    normal = slope()

    def evaluate(x, t):
        return value(np.asarray(x, dtype=float))

    def time_derivative(x, t):
        return np.zeros_like(np.asarray(x, dtype=float))

    def normal_derivative(end, t):
        return normal

    return Certificate(
        kind=CertificateKind.BOUNDARY_LAYER_SUPER,
        constants={
            "alpha": alpha,
            "eps": eps,
            "omega": omega,
            "beta": beta,
            "gamma": gamma,
            "A": A,
        },
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"support_width": (omega - eps) / alpha, "collar_width": length / 4.0},
    )


# -- pure-time and separable ODE bounds -------------------------------------


def decaying_floor(p: float, c_upper: TimeProfile, A: float):
    """w(t) solving w' = -sup_c(t) w^p from w(0) = A, in closed form.

    For p < 1 the profile hits zero in finite time and stays there; for p = 1
    it is a pure exponential damping.
    """
    if p > 1.0:
        raise HypothesisNotMetError("the decaying floor needs p <= 1")

    if p == 1.0:

        def w(t):
            t = np.asarray(t, dtype=float)
            return A * np.exp(-np.vectorize(lambda tv: c_upper.integral(tv))(t))

        def dw(t):
            return -c_upper.value(t) * w(t)

    else:

        def w(t):
            t = np.asarray(t, dtype=float)
            cum = np.vectorize(lambda tv: c_upper.integral(tv))(t)
            core = np.maximum(A ** (1.0 - p) - (1.0 - p) * cum, 0.0)
            return core ** (1.0 / (1.0 - p))

        def dw(t):
            vals = w(t)
            return -c_upper.value(t) * power(np.asarray(vals, dtype=float), p)

    return w, dw


def extinction_factor(p: float, c0: float, b: float, f0: float):
    """f(t) solving f' = f/b - c0 b^(p-1) f^p for p < 1, plus its derivative.

    f vanishes identically once the bracket closes; the threshold on f(0)
    guaranteeing extinction by time tau is :func:`extinction_threshold`.
    """
    if not (0.0 < p < 1.0):
        raise HypothesisNotMetError("the extinction factor needs 0 < p < 1")
    q = 1.0 - p

    def f(t):
        t = np.asarray(t, dtype=float)
        bracket = f0**q - c0 * b**p * (1.0 - np.exp((p - 1.0) * t / b))
        return np.exp(t / b) * np.maximum(bracket, 0.0) ** (1.0 / q)

    def df(t):
        vals = np.asarray(f(t), dtype=float)
        return vals / b - c0 * b ** (p - 1.0) * power(vals, p)

    return f, df


def extinction_threshold(p: float, c0: float, b: float, tau: float) -> float:
    """Largest f(0) below which the extinction factor is zero for t >= tau."""
    return (c0 * b**p * (1.0 - math.exp((p - 1.0) * tau / b))) ** (1.0 / (1.0 - p))


def damped_growth_factor(p: float, c2: TimeProfile, b: float, g0: float):
    """g(t) solving g' = g/b - b^(p-1) c2(t) g^p for p > 1, plus its derivative."""
    if not (p > 1.0):
        raise HypothesisNotMetError("the damped growth factor needs p > 1")
    rate = (p - 1.0) / b

    def accumulated(t: float) -> float:
        # int_0^t exp(rate*tau) c2(tau) dtau, closed form for exponential families
        if c2.alpha == 0.0 and c2.beta == 0.0:
            r = rate + c2.rho
            if r == 0.0:
                return c2.amplitude * t
            return c2.amplitude * (math.exp(r * t) - 1.0) / r
        val, _ = integrate.quad(
            lambda tau: math.exp(rate * tau) * float(c2.value(tau)),
            0.0,
            t,
            epsabs=1e-14,
            epsrel=1e-12,
            limit=400,
        )
        return val

    def g(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(ts)
        for i, tv in enumerate(ts):
            bracket = g0 ** (1.0 - p) + (p - 1.0) * b ** (p - 1.0) * accumulated(float(tv))
            out[i] = math.exp(tv / b) * bracket ** (-1.0 / (p - 1.0))
        return out if np.ndim(t) else float(out[0])

    def dg(t):
        vals = np.asarray(g(t), dtype=float)
        return vals / b - b ** (p - 1.0) * c2.value(t) * power(vals, p)

    return g, dg


def build_ode_bound(
    spec: ProblemSpec,
    kind: str,
    constants: Optional[dict] = None,
    grid: Optional[Grid] = None,
) -> Certificate:
    """Closed-form pure-time or separable bounds.

    kinds:
      "sub-low-absorption":   w(t) from w' = -sup_c w^p, p <= 1; needs u0 >= A.
      "sub-steep-absorption": w(t) = [(p-1) c1 (t + t2)]^(-1/(p-1)), l > p > 1.
      "super-small-data":     psi(x) f(t) with extinguishing f, p < 1 < l.
      "super-kernel-dominated": psi(x) g(t) with damped growth g, l > p > 1.
    """
    constants = dict(constants or {})
    if kind == "sub-low-absorption":
        return _build_sub_low(spec, constants)
    if kind == "sub-steep-absorption":
        return _build_sub_steep(spec, constants)
    if kind == "super-small-data":
        return _build_super_small_data(spec, constants, grid)
    if kind == "super-kernel-dominated":
        return _build_super_kernel_dominated(spec, constants, grid)
    raise ValueError(f"unknown ode bound kind {kind!r}")


def _build_sub_low(spec: ProblemSpec, constants: dict) -> Certificate:
    if spec.p > 1.0:
        raise HypothesisNotMetError("sub-low-absorption bound needs p <= 1")
    window = constants.pop("window", (0.0, 10.0))
    c_upper = spec.c.bounds().upper
    A = constants.get("A")
    if A is None:
        A = float(np.min(spec.u0.value(np.linspace(0.0, spec.domain.length, 513))))
    if not (A > 0.0):
        raise HypothesisNotMetError("sub-low-absorption bound needs a positive floor A <= u0")
    w, dw = decaying_floor(spec.p, c_upper, A)

    def evaluate(x, t):
        return np.full_like(np.asarray(x, dtype=float), float(np.asarray(w(t))))

    def time_derivative(x, t):
        return np.full_like(np.asarray(x, dtype=float), float(np.asarray(dw(t))))

    return Certificate(
        kind=CertificateKind.ODE_SUB,
        constants={"A": A, "p": spec.p},
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=lambda end, t: 0.0,
        gates={"p_le_1": True, "floor_below_u0": True},
    )


def _build_sub_steep(spec: ProblemSpec, constants: dict) -> Certificate:
    p, l = spec.p, spec.l
    if not (l > p > 1.0):
        raise HypothesisNotMetError("sub-steep-absorption bound needs l > p > 1")
    window = constants.pop("window", (0.0, 10.0))
    c1 = constants.get("c1")
    if c1 is None:
        c1 = spec.c.bounds().upper.sup_on(*window)
    if not (c1 > 0.0):
        raise HypothesisNotMetError("sub-steep-absorption bound needs sup c > 0")
    u0_min = float(np.min(spec.u0.value(np.linspace(0.0, spec.domain.length, 513))))
    if not (u0_min > 0.0):
        raise HypothesisNotMetError("needs a strictly positive initial floor")
    t2 = constants.get("t2")
    if t2 is None:
        # smallest shift keeping w(0) <= inf u0, with margin
        t2 = _MARGIN * u0_min ** -(p - 1.0) / ((p - 1.0) * c1)
    expo = -1.0 / (p - 1.0)

    def w(t):
        return ((p - 1.0) * c1 * (np.asarray(t, dtype=float) + t2)) ** expo

    def dw(t):
        # w solves w' = -c1 w^p exactly
        return -c1 * np.asarray(w(t), dtype=float) ** p

    def evaluate(x, t):
        return np.full_like(np.asarray(x, dtype=float), float(np.asarray(w(t))))

    def time_derivative(x, t):
        return np.full_like(np.asarray(x, dtype=float), float(np.asarray(dw(t))))

    return Certificate(
        kind=CertificateKind.ODE_SUB,
        constants={"c1": c1, "t2": t2, "p": p},
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=lambda end, t: 0.0,
        gates={"l_gt_p_gt_1": True, "w0_below_u0": w(0.0) <= u0_min},
    )


def _default_psi(spec: ProblemSpec, grid: Optional[Grid], constants: dict) -> PsiSolution:
    if grid is None:
        grid = Grid(n=400, length=spec.domain.length)
    K = constants.get("additive_constant", spec.domain.length ** 2 / 4.0)
    return solve_psi(grid, K)


def _build_super_small_data(spec: ProblemSpec, constants: dict, grid: Optional[Grid]) -> Certificate:
    p, l = spec.p, spec.l
    if not (p < 1.0 < l):
        raise HypothesisNotMetError("super-small-data bound needs p < 1 < l")
    tau = constants.get("tau", 1.0)
    window = constants.pop("window", (0.0, 2.0 * tau))
    psi = _default_psi(spec, grid, constants)
    g = psi.grid
    c_lower = spec.c.bounds().lower
    c_min = c_lower.inf_on(0.0, tau)
    if not (c_min > 0.0):
        raise HypothesisNotMetError("needs absorption positive near t = 0")
    b, sup_psi = psi.b, psi.sup_psi
    # pointwise validity across the profile needs the effective constant
    # deflated by the profile height ratio (and a safety margin)
    c0 = constants.get("c0")
    if c0 is None:
        c0 = (c_min / _MARGIN) * (b / sup_psi) ** (1.0 - p)
    thresh_ext = extinction_threshold(p, c0, b, tau)
    kmax = _kernel_sup_on_window(spec, (0.0, tau))
    psi_mass = psi.lp_mass(l)
    L = spec.domain.length
    if kmax * psi_mass > 0.0:
        thresh_bdry = ((L / 2.0) / (kmax * psi_mass)) ** (1.0 / (l - 1.0))
    else:
        thresh_bdry = math.inf
    f0 = constants.get("f0")
    if f0 is None:
        f0 = min(thresh_ext, thresh_bdry) / _MARGIN
    if not (0.0 < f0 < thresh_ext):
        raise CertificateInfeasibleError(
            f"f0={f0:.4g} outside the extinction threshold {thresh_ext:.4g}"
        )
    if f0 > thresh_bdry:
        raise CertificateInfeasibleError(
            f"f0={f0:.4g} violates the flux threshold {thresh_bdry:.4g}"
        )
    f, df = extinction_factor(p, c0, b, f0)
    if float(np.asarray(f(tau))) != 0.0:
        raise CertificateInfeasibleError("factor does not extinguish by tau; threshold violated")

    def evaluate(x, t):
        return psi.psi_at(x) * float(np.asarray(f(t)))

    def time_derivative(x, t):
        return psi.psi_at(x) * float(np.asarray(df(t)))

    def normal_derivative(end, t):
        return (L / 2.0) * float(np.asarray(f(t)))

    return Certificate(
        kind=CertificateKind.PSI_PROFILE_SUPER,
        constants={
            "f0": f0,
            "tau": tau,
            "c0": c0,
            "b": b,
            "sup_psi": sup_psi,
            "additive_constant": psi.additive_constant,
            "threshold_extinction": thresh_ext,
            "threshold_boundary": thresh_bdry,
        },
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"p_lt_1_lt_l": True, "extinguishes_by_tau": True},
    )


def _build_super_kernel_dominated(spec: ProblemSpec, constants: dict, grid: Optional[Grid]) -> Certificate:
    p, l = spec.p, spec.l
    if not (l > p > 1.0):
        raise HypothesisNotMetError("super-kernel-dominated bound needs l > p > 1")
    window = constants.pop("window", (0.0, 10.0))
    psi = _default_psi(spec, grid, constants)
    c_lower = spec.c.bounds().lower
    if not (c_lower.amplitude > 0.0):
        raise HypothesisNotMetError("needs a positive absorption floor")
    if c_lower.rho > 0.0:
        c2 = TimeProfile(c_lower.inf_on(0.0, max(window[1], 100.0)))
    else:
        c2 = c_lower
    b, sup_psi = psi.b, psi.sup_psi
    # for p > 1 the profile-height ratio works in our favor; keep a margin
    c2 = c2.scaled(1.0 / _MARGIN)
    psi_mass = psi.lp_mass(l)
    L = spec.domain.length
    k_hi = spec.kernel_upper_profile()
    flux_cap = (L / 2.0) / psi_mass

    ts = np.linspace(window[0], window[1], 257)
    g0 = constants.get("g0")
    candidates = [g0] if g0 is not None else list(0.5 / np.logspace(0.0, 8.0, 33))
    for cand in candidates:
        g, dg = damped_growth_factor(p, c2, b, cand)
        gvals = np.asarray(g(ts), dtype=float)
        kvals = k_hi.value(ts) * np.ones_like(ts)
        if np.all(kvals * gvals ** (l - 1.0) * _MARGIN <= flux_cap):
            g0 = cand
            break
    else:
        raise CertificateInfeasibleError("no start value passes the flux inequality on the window")

    def evaluate(x, t):
        return psi.psi_at(x) * float(np.asarray(g(t)))

    def time_derivative(x, t):
        return psi.psi_at(x) * float(np.asarray(dg(t)))

    def normal_derivative(end, t):
        return (L / 2.0) * float(np.asarray(g(t)))

    return Certificate(
        kind=CertificateKind.PSI_PROFILE_SUPER,
        constants={
            "g0": g0,
            "b": b,
            "sup_psi": sup_psi,
            "additive_constant": psi.additive_constant,
        },
        window=window,
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"l_gt_p_gt_1": True, "absorption_floor": True},
    )


def build_psi_profile_subsolution(
    spec: ProblemSpec,
    grid: Grid,
    t1: float,
    f_t1: float,
    window_end: float,
    additive_constant: Optional[float] = None,
) -> Certificate:
    """Growing separable lower bound psi(x) f(t) for l > p > 1, window-flagged.

    The flux inequality only holds once the kernel has outgrown the absorption
    power, so validity starts at t1 and the recorded lower constant for
    f * c_sup^(1/(p-1)) is an estimate over the finite window, not a limit.
    """
    p, l = spec.p, spec.l
    if not (l > p > 1.0):
        raise HypothesisNotMetError("psi-profile subsolution needs l > p > 1")
    K = additive_constant if additive_constant is not None else spec.domain.length ** 2 / 4.0
    psi = solve_psi(grid, K)
    m = psi.sup_psi
    c1 = spec.c.bounds().upper
    if not (c1.amplitude > 0.0):
        raise HypothesisNotMetError("needs a positive absorption envelope")
    rate = (p - 1.0) / m

    def accumulated(t: float) -> float:
        # int_{t1}^{t} exp(rate*(tau - t1)) c1(tau) dtau
        if c1.alpha == 0.0 and c1.beta == 0.0:
            r = rate + c1.rho
            if r == 0.0:
                return c1.amplitude * math.exp(-rate * t1) * (t - t1)
            return c1.amplitude * math.exp(-rate * t1) * (math.exp(r * t) - math.exp(r * t1)) / r
        val, _ = integrate.quad(
            lambda tau: math.exp(rate * (tau - t1)) * float(c1.value(tau)),
            t1,
            t,
            epsabs=1e-13,
            epsrel=1e-11,
            limit=400,
        )
        return val

    def f(t):
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(ts)
        for i, tv in enumerate(ts):
            bracket = f_t1 ** (1.0 - p) + (p - 1.0) * m ** (p - 1.0) * accumulated(float(tv))
            out[i] = math.exp((tv - t1) / m) * bracket ** (-1.0 / (p - 1.0))
        return out if np.ndim(t) else float(out[0])

    def df(t):
        vals = np.asarray(f(t), dtype=float)
        return vals / m - m ** (p - 1.0) * c1.value(t) * power(vals, p)

    # flux inequality on the window
    psi_mass = psi.lp_mass(l)
    L = spec.domain.length
    k_lo = spec.kernel_lower_profile()
    ts = np.linspace(t1, window_end, 257)
    fvals = np.asarray(f(ts), dtype=float)
    need = (L / 2.0) / psi_mass
    have = k_lo.value(ts) * np.ones_like(ts) * fvals ** (l - 1.0)
    if not np.all(have >= need):
        first_bad = float(ts[int(np.argmin(have >= need))])
        raise CertificateInfeasibleError(
            f"flux inequality fails at t={first_bad:.4g}; start the window later "
            "(the kernel has not yet outgrown the absorption)"
        )
    d1_estimate = float(np.min(fvals * c1.value(ts) ** (1.0 / (p - 1.0))))

    def evaluate(x, t):
        return psi.psi_at(x) * float(np.asarray(f(t)))

    def time_derivative(x, t):
        return psi.psi_at(x) * float(np.asarray(df(t)))

    def normal_derivative(end, t):
        return (L / 2.0) * float(np.asarray(f(t)))

    return Certificate(
        kind=CertificateKind.PSI_PROFILE_SUB,
        constants={
            "f_t1": f_t1,
            "t1": t1,
            "m": m,
            "additive_constant": K,
            "d1_estimate": d1_estimate,
            "window_dependent": True,
        },
        window=(t1, window_end),
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"l_gt_p_gt_1": True, "window_flagged": True},
    )


# -- constant and zero certificates ------------------------------------------


def make_constant_certificate(value: float, window: tuple[float, float], direction: str) -> Certificate:
    kind = CertificateKind.ODE_SUPER if direction == "super" else CertificateKind.ODE_SUB

    def evaluate(x, t):
        return np.full_like(np.asarray(x, dtype=float), value)

    def zero(x, t):
        return np.zeros_like(np.asarray(x, dtype=float))

    return Certificate(
        kind=kind,
        constants={"value": value},
        window=window,
        evaluate=evaluate,
        time_derivative=zero,
        normal_derivative=lambda end, t: 0.0,
        gates={},
    )


def make_zero_certificate(window: tuple[float, float], direction: str = "sub") -> Certificate:
    return make_constant_certificate(0.0, window, direction)


# ---------------------------------------------------------------------------
# collar (traveling) subsolution, monitor grade
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollarReport:
    """Collar-only residual minima plus the lateral domination margin."""

    interior_min: float
    boundary_min: float
    domination_min: float
    passed: bool
    constants: dict


def build_collar_subsolution(
    spec: ProblemSpec,
    grid: Grid,
    t0: float,
    t2: float,
    gamma: float,
    sigma: float,
    omega: float = 1.0,
) -> Certificate:
    """Traveling collar profile (t2 + omega*s - t)^(-sigma) near the boundary.

    Monitor grade: its inequalities are checked on the collar only, and the
    lateral/initial domination is tested against a numeric trajectory rather
    than by solving the auxiliary collar problem separately.
    """
    if not (t2 > t0):
        raise HypothesisNotMetError("needs t2 > t0")
    if not (gamma < t2 - t0):
        raise HypothesisNotMetError("collar width must stay below the time span")
    L = spec.domain.length

    def s_of(x):
        return np.minimum(x, L - x)

    def evaluate(x, t):
        s = s_of(np.asarray(x, dtype=float))
        vals = (t2 + omega * s - t) ** (-sigma)
        return np.where(s <= gamma, vals, 0.0)

    def time_derivative(x, t):
        s = s_of(np.asarray(x, dtype=float))
        vals = sigma * (t2 + omega * s - t) ** (-sigma - 1.0)
        return np.where(s <= gamma, vals, 0.0)

    def normal_derivative(end, t):
        # outward normal is -d/ds and the profile decays inward
        return omega * sigma * (t2 - t) ** (-sigma - 1.0)

    return Certificate(
        kind=CertificateKind.TRAVELING_SUB,
        constants={"t0": t0, "t2": t2, "gamma": gamma, "sigma": sigma, "omega": omega},
        window=(t0, t2),
        evaluate=evaluate,
        time_derivative=time_derivative,
        normal_derivative=normal_derivative,
        gates={"collar_only": True},
    )


def check_collar_subsolution(
    cert: Certificate,
    spec: ProblemSpec,
    grid: Grid,
    trajectory: Optional[Trajectory] = None,
    nt: int = 65,
) -> CollarReport:
    """Verify the collar inequalities and, given a run, lateral domination.

    Interior: psi_t <= psi_ss - c psi^p on collar nodes.  Boundary:
    dpsi/dnu <= kernel integral over the collar.  Domination: the numeric
    solution stays above the profile on the collar while both exist.
    """
    cns = cert.constants
    t0, t2, gamma, sigma, omega = cns["t0"], cns["t2"], cns["gamma"], cns["sigma"], cns["omega"]
    L = spec.domain.length
    xs = grid.nodes
    s = np.minimum(xs, L - xs)
    collar = s <= gamma
    t_hi = t2 - 1e-9 * (t2 - t0)
    times = np.linspace(t0, t_hi, nt)

    interior_min = math.inf
    boundary_min = math.inf
    for t in times:
        core = t2 + omega * s[collar] - t
        psi_t = sigma * core ** (-sigma - 1.0)
        psi_ss = omega * omega * sigma * (sigma + 1.0) * core ** (-sigma - 2.0)
        cvals = spec.c.value(xs[collar], float(t)) * np.ones(int(collar.sum()))
        resid = psi_ss - cvals * core ** (-sigma * spec.p) - psi_t
        interior_min = min(interior_min, float(np.min(resid)))

        # subsolution flux requirement at the outer boundary: dpsi/dnu <= flux
        vals = np.where(collar, (t2 + omega * s - t) ** (-sigma), 0.0)
        state = GridState(t=float(t), u=vals)
        normal = omega * sigma * (t2 - t) ** (-sigma - 1.0)
        for end in (LEFT, RIGHT):
            flux = boundary_flux(state, spec, end, grid)
            boundary_min = min(boundary_min, float(flux - normal))

    domination_min = math.inf
    dom_scale = 1.0
    if trajectory is not None:
        for j in range(len(trajectory)):
            tj = float(trajectory.t[j])
            if tj < t0 or tj > t2:
                continue
            prof = np.asarray(cert.evaluate(xs, tj), dtype=float)
            gap = trajectory.snapshots[j][collar] - prof[collar]
            domination_min = min(domination_min, float(np.min(gap)))
            dom_scale = max(dom_scale, float(np.max(prof[collar])))

    passed = (
        interior_min >= -1e-8
        and boundary_min >= -1e-8
        and (trajectory is None or domination_min >= -1e-6 * dom_scale)
    )
    return CollarReport(
        interior_min=interior_min,
        boundary_min=boundary_min,
        domination_min=domination_min,
        passed=passed,
        constants=dict(cns),
    )


def scan_collar_subsolution(
    spec: ProblemSpec,
    grid: Grid,
    trajectory: Trajectory,
    sigmas: Optional[np.ndarray] = None,
    variant: str = "steep",
) -> tuple[Certificate, CollarReport]:
    """Search (sigma or omega, gamma, t2 - t0) for a feasible collar profile.

    variant "steep" scans the profile decay rate with unit slope; variant
    "shallow" fixes the decay rate at 2/(p-1) and scans the slope, the
    borderline l = p construction.  The scan order is a package choice.
    """
    l, p = spec.l, spec.p
    u0_min = float(np.min(spec.u0.value(grid.nodes)))
    if variant == "steep":
        if not (l > 1.0):
            raise HypothesisNotMetError("collar profile needs l > 1")
        sig_list = sigmas if sigmas is not None else 2.0 / (l - 1.0) * np.array([1.5, 2.0, 1.2, 3.0])
        omg_list = np.array([1.0])
    else:
        if not (p > 1.0):
            raise HypothesisNotMetError("shallow collar profile needs p > 1")
        sig_list = np.array([2.0 / (p - 1.0)])
        omg_list = np.logspace(1.0, -3.0, 17)

    for sigma in sig_list:
        for omega in omg_list:
            # the profile maximum over the closure is gamma-limited by u0
            gamma_floor = (u0_min * 0.9) ** (-1.0 / sigma) / max(omega, 1e-12)
            for gamma in gamma_floor * np.array([1.05, 1.5, 2.5, 4.0]):
                if gamma >= spec.domain.length / 2.0:
                    continue
                for span in gamma * np.array([1.1, 1.5, 2.5, 5.0]):
                    t0 = 0.0
                    t2 = t0 + span
                    try:
                        cert = build_collar_subsolution(spec, grid, t0, t2, gamma, float(sigma), float(omega))
                    except HypothesisNotMetError:
                        continue
                    report = check_collar_subsolution(cert, spec, grid, trajectory)
                    if report.passed:
                        return cert, report
    raise CertificateInfeasibleError("no feasible collar profile in the scan ranges")


# ---------------------------------------------------------------------------
# sandwich comparison against a numeric trajectory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    """Outcome of bracketing a trajectory between two certificates."""

    passed: bool
    margin_lower: float
    margin_upper: float
    samples_checked: int


def sandwich_test(
    spec: ProblemSpec,
    cert_lower: Optional[Certificate],
    cert_upper: Optional[Certificate],
    trajectory: Trajectory,
) -> SandwichReport:
    """Assert lower <= numeric <= upper nodewise at all sampled times.

    Tolerance 1e-6 + h^2 * scale per sample.  Raises
    :class:`SandwichViolationError` carrying the first violating point.
    """
    grid = trajectory.grid
    xs = grid.nodes
    h2 = grid.h * grid.h
    lo_t = max(
        cert_lower.window[0] if cert_lower else -math.inf,
        cert_upper.window[0] if cert_upper else -math.inf,
        float(trajectory.t[0]),
    )
    hi_t = min(
        cert_lower.window[1] if cert_lower else math.inf,
        cert_upper.window[1] if cert_upper else math.inf,
        float(trajectory.t[-1]),
    )
    if not hi_t >= lo_t:
        raise ValueError("certificate windows do not overlap the trajectory")

    margin_lower = math.inf
    margin_upper = math.inf
    checked = 0
    for j in range(len(trajectory)):
        t = float(trajectory.t[j])
        if t < lo_t or t > hi_t:
            continue
        u = trajectory.snapshots[j]
        checked += 1
        scale = float(np.max(u))
        if cert_lower is not None:
            lo = np.asarray(cert_lower.evaluate(xs, t), dtype=float)
            scale_lo = max(scale, float(np.max(np.abs(lo))))
            tol = 1e-6 + h2 * scale_lo
            gap = u - lo
            i = int(np.argmin(gap))
            margin_lower = min(margin_lower, float(gap[i]))
            if gap[i] < -tol:
                raise SandwichViolationError(
                    f"trajectory dropped below the lower certificate by {-gap[i]:.3e} "
                    f"at x={xs[i]:.4g}, t={t:.6g}",
                    x=float(xs[i]),
                    t=t,
                    gap=float(gap[i]),
                    side="lower",
                )
        if cert_upper is not None:
            up = np.asarray(cert_upper.evaluate(xs, t), dtype=float)
            scale_up = max(scale, float(np.max(np.abs(up))))
            tol = 1e-6 + h2 * scale_up
            gap = up - u
            i = int(np.argmin(gap))
            margin_upper = min(margin_upper, float(gap[i]))
            if gap[i] < -tol:
                raise SandwichViolationError(
                    f"trajectory exceeded the upper certificate by {-gap[i]:.3e} "
                    f"at x={xs[i]:.4g}, t={t:.6g}",
                    x=float(xs[i]),
                    t=t,
                    gap=float(gap[i]),
                    side="upper",
                )
    return SandwichReport(
        passed=True,
        margin_lower=margin_lower,
        margin_upper=margin_upper,
        samples_checked=checked,
    )

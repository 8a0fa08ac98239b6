"""Uniform-grid discretization: ghost-node Laplacian and nonlocal flux quadrature.

The 3-point stencil is closed at the endpoints with ghost values encoding the
outward normal derivative, and the nonlocal flux uses trapezoid quadrature
with the same weights as the mass functional.  That pairing makes the discrete
Green identity

    sum_i w_i (lap_h u)_i = g_left + g_right

exact up to roundoff for every nodal vector and flux pair, which the mass
arguments downstream rely on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidProblemError
from .problem import LEFT, RIGHT, ProblemSpec

__all__ = ["Grid", "GridState", "boundary_flux", "discrete_laplacian", "rhs", "power"]


@dataclass(frozen=True)
class Grid:
    """n+1 equispaced nodes on [0, L] with trapezoid quadrature weights."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 8:
            raise InvalidProblemError("grid needs at least 8 cells")
        if not (self.length > 0.0):
            raise InvalidProblemError("grid length must be positive")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n + 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n + 1, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def interior_band(self, lo_frac: float = 0.25, hi_frac: float = 0.75) -> slice:
        lo = int(math.ceil(lo_frac * self.n))
        hi = int(math.floor(hi_frac * self.n))
        return slice(lo, hi + 1)


@dataclass(frozen=True)
class GridState:
    """Nodal solution values at one instant; entries finite and clamped at 0."""

    t: float
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        object.__setattr__(self, "u", u)

    @property
    def max(self) -> float:
        return float(np.max(self.u))


def power(u: np.ndarray, expo: float) -> np.ndarray:
    """u**expo with the one-sided convention 0**expo = 0 for expo > 0.

    For expo < 1 the map is not Lipschitz at 0; no regularization is applied,
    matching the continuous model's loss of uniqueness at the trivial state.
    """
    if expo == 1.0:
        return np.array(u, copy=True)
    if expo == 2.0:
        return u * u
    if expo == 3.0:
        return u * u * u
    if expo == 0.5:
        return np.sqrt(u)
    return np.where(u > 0.0, u, 0.0) ** expo if expo < 1.0 else u**expo


def boundary_flux(state: GridState, spec: ProblemSpec, endpoint: str, grid: Grid) -> float:
    """Nonlocal flux g_b(t) = sum_j w_j k(b, y_j, t) u_j^l (trapezoid rule).

    Exact for integrands piecewise linear in y; monotone nondecreasing in
    every nodal value since k >= 0 and l > 0.
    """
    kdesc = spec.kernel(endpoint)
    kvals = kdesc.value(grid.nodes, state.t) * np.ones(grid.n + 1)
    return float(np.dot(grid.weights, kvals * power(state.u, spec.l)))


def discrete_laplacian(u: np.ndarray, g_left: float, g_right: float, grid: Grid) -> np.ndarray:
    """3-point Laplacian with ghost nodes carrying the outward normal fluxes.

    Ghosts: u[-1] = u[1] + 2h*g_left and u[n+1] = u[n-1] + 2h*g_right, which
    encode du/dnu = g at second order.  Exact on quadratics with consistent
    fluxes, and exactly mass-balanced against the trapezoid weights.
    """
    if not (math.isfinite(g_left) and math.isfinite(g_right)):
        raise InvalidProblemError("boundary fluxes must be finite")
    h = grid.h
    out = np.empty_like(u)
    out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / (h * h)
    out[0] = 2.0 * (u[1] - u[0]) / (h * h) + 2.0 * g_left / h
    out[-1] = 2.0 * (u[-2] - u[-1]) / (h * h) + 2.0 * g_right / h
    return out


def rhs(state: GridState, spec: ProblemSpec, grid: Grid, forcing=None) -> np.ndarray:
    """Semi-discrete right-hand side lap_h u - c(x, t) u^p (+ optional forcing).

    The forcing hook exists for manufactured-solution convergence tests only.
    Overflow is allowed to propagate; the driver treats it as a blow-up signal.
    """
    g_left = boundary_flux(state, spec, LEFT, grid)
    g_right = boundary_flux(state, spec, RIGHT, grid)
    with np.errstate(over="ignore", invalid="ignore"):
        out = discrete_laplacian(state.u, g_left, g_right, grid)
        cvals = spec.c.value(grid.nodes, state.t) * np.ones(grid.n + 1)
        out -= cvals * power(state.u, spec.p)
        if forcing is not None:
            out += forcing(grid.nodes, state.t)
    return out

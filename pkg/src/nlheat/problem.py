"""Continuous problem description and hypothesis validation.

The equation under study on an interval (0, L):

    u_t = u_xx - c(x,t) u**p            in the interior,
    du/dnu = int_0^L k(., y, t) u(y,t)**l dy   at both endpoints,
    u(., 0) = u0 >= 0,

with p, l > 0 and nonnegative c, k.  The boundary measure is the counting
measure on the two endpoints, so |boundary| = 2 and |domain| = L.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .coefficients import CoefficientDescriptor, SpatialModulation, constant
from .errors import InvalidProblemError

__all__ = [
    "Domain1D",
    "InitialDatum",
    "ProblemSpec",
    "ValidationReport",
    "validate",
    "constant_datum",
    "cosine_datum",
    "psi_datum",
    "datum_from_callable",
]

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class Domain1D:
    """The interval (0, length) with its two-point boundary."""

    length: float

    def __post_init__(self):
        if not (self.length > 0.0 and math.isfinite(self.length)):
            raise InvalidProblemError("domain length must be positive and finite")

    @property
    def volume(self) -> float:
        return self.length

    @property
    def boundary_measure(self) -> float:
        return 2.0

    @property
    def boundary_points(self) -> tuple[float, float]:
        return (0.0, self.length)


@dataclass(frozen=True)
class InitialDatum:
    """Initial profile with an attached derivative for compatibility residuals."""

    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "custom"
    params: tuple = ()

    def value(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def derivative(self, x):
        if self.dfn is not None:
            return np.asarray(self.dfn(np.asarray(x, dtype=float)), dtype=float)
        x = np.asarray(x, dtype=float)
        h = 1e-6
        return (self.value(x + h) - self.value(x - h)) / (2.0 * h)

    def to_dict(self) -> dict:
        return {"label": self.label, "params": list(self.params)}


def constant_datum(value: float) -> InitialDatum:
    return InitialDatum(
        fn=lambda x, v=value: np.full_like(np.asarray(x, dtype=float), v),
        dfn=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label="constant",
        params=(value,),
    )


def cosine_datum(offset: float, amplitude: float, length: float) -> InitialDatum:
    """offset + amplitude*cos(pi x / length); zero normal derivative at both ends."""
    w = math.pi / length
    return InitialDatum(
        fn=lambda x: offset + amplitude * np.cos(w * np.asarray(x, dtype=float)),
        dfn=lambda x: -amplitude * w * np.sin(w * np.asarray(x, dtype=float)),
        label="cosine",
        params=(offset, amplitude, length),
    )


def psi_datum(scale: float, additive_constant: float, length: float) -> InitialDatum:
    """scale * ((x^2 - L x)/2 + additive_constant), the small-data profile shape."""
    return InitialDatum(
        fn=lambda x: scale * ((np.asarray(x, dtype=float) ** 2 - length * np.asarray(x, dtype=float)) / 2.0 + additive_constant),
        dfn=lambda x: scale * (np.asarray(x, dtype=float) - length / 2.0),
        label="psi",
        params=(scale, additive_constant, length),
    )


def datum_from_callable(fn, dfn=None, label="custom") -> InitialDatum:
    return InitialDatum(fn=fn, dfn=dfn, label=label)


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable description of one initial-boundary-value problem.

    The kernel may differ between the two endpoints; ``k_left`` carries
    k(0, y, t) and ``k_right`` carries k(L, y, t), each with its spatial
    modulation acting on the integration variable y.
    """

    p: float
    l: float
    c: CoefficientDescriptor
    k_left: CoefficientDescriptor
    k_right: CoefficientDescriptor
    u0: InitialDatum
    domain: Domain1D

    @classmethod
    def build(
        cls,
        p: float,
        l: float,
        c: CoefficientDescriptor,
        k: CoefficientDescriptor | tuple[CoefficientDescriptor, CoefficientDescriptor],
        u0: InitialDatum,
        length: float = 1.0,
    ) -> "ProblemSpec":
        if isinstance(k, tuple):
            k_left, k_right = k
        else:
            k_left = k_right = k
        return cls(p=p, l=l, c=c, k_left=k_left, k_right=k_right, u0=u0, domain=Domain1D(length))

    def with_u0(self, u0: InitialDatum) -> "ProblemSpec":
        return replace(self, u0=u0)

    def kernel(self, endpoint: str) -> CoefficientDescriptor:
        if endpoint == LEFT:
            return self.k_left
        if endpoint == RIGHT:
            return self.k_right
        raise ValueError(f"endpoint must be 'left' or 'right', got {endpoint!r}")

    def kernel_lower_profile(self):
        """Profile below inf over (endpoint, y) of the kernel."""
        lo_l = self.k_left.profile().scaled(self.k_left.spatial_bounds()[0])
        lo_r = self.k_right.profile().scaled(self.k_right.spatial_bounds()[0])
        return lo_l if lo_l.amplitude <= lo_r.amplitude else lo_r

    def kernel_upper_profile(self):
        hi_l = self.k_left.profile().scaled(self.k_left.spatial_bounds()[1])
        hi_r = self.k_right.profile().scaled(self.k_right.spatial_bounds()[1])
        return hi_l if hi_l.amplitude >= hi_r.amplitude else hi_r

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "l": self.l,
            "length": self.domain.length,
            "c": self.c.to_dict(),
            "k_left": self.k_left.to_dict(),
            "k_right": self.k_right.to_dict(),
            "u0": self.u0.to_dict(),
        }


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the hypothesis checks; never mutates the inspected spec."""

    ok: bool
    errors: tuple[str, ...]
    warnings: tuple[str, ...]
    compatibility_left: float
    compatibility_right: float

    def raise_if_invalid(self):
        if not self.ok:
            raise InvalidProblemError("; ".join(self.errors))


_COMPAT_WARN = 1e-8


def validate(spec: ProblemSpec, samples: int = 513) -> ValidationReport:
    """Check sign hypotheses and report boundary compatibility residuals.

    The compatibility condition (initial normal derivative equals the initial
    nonlocal flux) is reported as a warning, not enforced; runs proceed either
    way so its effect on the transient can be observed.
    """
    errors: list[str] = []
    warnings: list[str] = []

    if not (spec.p > 0.0):
        errors.append(f"exponent p must be positive, got {spec.p}")
    if not (spec.l > 0.0):
        errors.append(f"exponent l must be positive, got {spec.l}")

    L = spec.domain.length
    xs = np.linspace(0.0, L, samples)

    for name, desc in (("c", spec.c), ("k_left", spec.k_left), ("k_right", spec.k_right)):
        if desc.amplitude < 0.0:
            errors.append(f"coefficient {name} has negative amplitude {desc.amplitude}")
        if desc.spatial is not None:
            vals = desc.spatial.sample(xs)
            if np.min(vals) < 0.0:
                errors.append(f"spatial modulation of {name} is negative somewhere")
            if desc.spatial.lower < 0.0:
                errors.append(f"declared lower bound of {name} modulation is negative")
            if np.min(vals) < desc.spatial.lower - 1e-12 or np.max(vals) > desc.spatial.upper + 1e-12:
                errors.append(
                    f"sampled {name} modulation leaves its declared bounds "
                    f"[{desc.spatial.lower}, {desc.spatial.upper}]"
                )

    u0_vals = spec.u0.value(xs)
    if not np.all(np.isfinite(u0_vals)):
        errors.append("initial datum is not finite everywhere")
    elif np.min(u0_vals) < 0.0:
        errors.append(f"initial datum is negative (min {np.min(u0_vals):.3e})")

    # compatibility residuals at both endpoints, trapezoid flux at t = 0
    w = np.full(samples, L / (samples - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    u0l = np.where(u0_vals > 0.0, u0_vals, 0.0) ** spec.l if spec.l < 1.0 else u0_vals**spec.l
    kl = spec.k_left.value(xs, 0.0) * np.ones_like(xs)
    kr = spec.k_right.value(xs, 0.0) * np.ones_like(xs)
    flux_left = float(np.dot(w, kl * u0l))
    flux_right = float(np.dot(w, kr * u0l))
    normal_left = -float(spec.u0.derivative(0.0))
    normal_right = float(spec.u0.derivative(L))
    r_left = abs(normal_left - flux_left)
    r_right = abs(normal_right - flux_right)
    if not (math.isfinite(r_left) and math.isfinite(r_right)):
        errors.append("compatibility residual is not finite")
    elif max(r_left, r_right) > _COMPAT_WARN:
        warnings.append(
            f"initial datum is not flux-compatible (residuals {r_left:.3e}, {r_right:.3e}); "
            "the transient will carry a boundary layer"
        )

    return ValidationReport(
        ok=not errors,
        errors=tuple(errors),
        warnings=tuple(warnings),
        compatibility_left=r_left,
        compatibility_right=r_right,
    )

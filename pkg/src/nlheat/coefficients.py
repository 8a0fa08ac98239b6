"""Closed coefficient families and their tail calculus.

The solver accepts reaction and kernel coefficients of the separable form

    q(x, t) = amplitude * phi(t) * s(x),

where the time profile ``phi`` belongs to a closed algebra

    phi(t) = exp(rho*t) * (1 + t)**alpha * log(e + t)**beta

(products and real powers stay inside the family) and ``s`` is a bounded
nonnegative spatial modulation with declared lower/upper bounds.  Restricting
to this algebra makes the improper-integral criteria used by the regime
classifier decidable: divergence of a weighted kernel mass, integrability of
its upper bound, boundedness of coupling ratios, and limits at infinity are
all computed from the exponent triple, never from truncated quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

__all__ = [
    "TimeProfile",
    "SpatialModulation",
    "CoefficientDescriptor",
    "CoefficientBounds",
    "Tail",
    "WeightClass",
    "weight_class",
    "weighted_profile",
    "weighted_tail_diverges",
    "weighted_tail_integrable",
    "weighted_limit",
    "weighted_value",
    "weighted_integral",
    "windowed_smoothing_constant",
]

_E = math.e

# Time-profile kind codes shared with the compiled stepping kernel.
KIND_CODES = {"constant": 0, "exponential": 1, "power-log": 2, "product": 3}


class Tail:
    """Limit classification at infinity."""

    ZERO = "zero"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class TimeProfile:
    """amplitude * exp(rho*t) * (1+t)**alpha * log(e+t)**beta on t >= 0."""

    amplitude: float
    rho: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.amplitude):
            raise ValueError("profile amplitude must be finite")

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * np.exp(self.rho * t)
        if self.alpha != 0.0:
            out = out * (1.0 + t) ** self.alpha
        if self.beta != 0.0:
            out = out * np.log(_E + t) ** self.beta
        return out if out.ndim else float(out)

    def __mul__(self, other: "TimeProfile") -> "TimeProfile":
        return TimeProfile(
            self.amplitude * other.amplitude,
            self.rho + other.rho,
            self.alpha + other.alpha,
            self.beta + other.beta,
        )

    def scaled(self, factor: float) -> "TimeProfile":
        return TimeProfile(self.amplitude * factor, self.rho, self.alpha, self.beta)

    def powered(self, s: float) -> "TimeProfile":
        """Profile raised to a real power; needs a positive amplitude."""
        if self.amplitude < 0.0:
            raise ValueError("cannot raise a negative profile to a real power")
        if self.amplitude == 0.0:
            if s <= 0.0:
                raise ValueError("zero profile cannot take a nonpositive power")
            return TimeProfile(0.0)
        return TimeProfile(self.amplitude**s, s * self.rho, s * self.alpha, s * self.beta)

    # -- tail calculus -----------------------------------------------------

    def limit_at_infinity(self) -> str:
        if self.amplitude == 0.0:
            return Tail.ZERO
        if self.rho > 0.0:
            return Tail.INFINITE
        if self.rho < 0.0:
            return Tail.ZERO
        if self.alpha > 0.0:
            return Tail.INFINITE
        if self.alpha < 0.0:
            return Tail.ZERO
        if self.beta > 0.0:
            return Tail.INFINITE
        if self.beta < 0.0:
            return Tail.ZERO
        return Tail.FINITE

    def bounded_on_halfline(self) -> bool:
        return self.limit_at_infinity() != Tail.INFINITE

    def tail_diverges(self) -> bool:
        """True when the improper integral over [0, inf) is infinite."""
        if self.amplitude == 0.0:
            return False
        if self.rho != 0.0:
            return self.rho > 0.0
        if self.alpha != -1.0:
            return self.alpha > -1.0
        return self.beta >= -1.0

    def tail_integrable(self) -> bool:
        return not self.tail_diverges()

    # -- evaluation --------------------------------------------------------

    def integral(self, t: float, t0: float = 0.0) -> float:
        """Integral over [t0, t]; closed form where it exists, quadrature otherwise."""
        if t < t0:
            raise ValueError("integration endpoint precedes start")
        if self.amplitude == 0.0 or t == t0:
            return 0.0
        if self.alpha == 0.0 and self.beta == 0.0:
            if self.rho == 0.0:
                return self.amplitude * (t - t0)
            return self.amplitude * (math.exp(self.rho * t) - math.exp(self.rho * t0)) / self.rho
        if self.rho == 0.0 and self.beta == 0.0:
            if self.alpha == -1.0:
                return self.amplitude * math.log((1.0 + t) / (1.0 + t0))
            a1 = self.alpha + 1.0
            return self.amplitude * ((1.0 + t) ** a1 - (1.0 + t0) ** a1) / a1
        val, _ = integrate.quad(self.value, t0, t, epsabs=1e-14, epsrel=1e-12, limit=400)
        return val

    def sup_on(self, t0: float, t1: float, samples: int = 1025) -> float:
        ts = np.linspace(t0, t1, samples)
        return float(np.max(self.value(ts)))

    def inf_on(self, t0: float, t1: float, samples: int = 1025) -> float:
        ts = np.linspace(t0, t1, samples)
        return float(np.min(self.value(ts)))


@dataclass(frozen=True)
class SpatialModulation:
    """Bounded nonnegative spatial factor with declared two-sided bounds."""

    fn: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float
    label: str = "custom"

    def sample(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class CoefficientDescriptor:
    """One coefficient of the problem: time family plus optional modulation.

    ``kind`` selects the time profile: "constant", "exponential" (exp(rate*t)),
    "power-log" ((1+t)**alpha * log(e+t)**beta) or "product" (all factors).
    Sign hypotheses are checked by :func:`nlheat.problem.validate`, not here.
    """

    kind: str
    amplitude: float
    rate: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    spatial: Optional[SpatialModulation] = None

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @property
    def kind_code(self) -> int:
        return KIND_CODES[self.kind]

    def _exponents(self):
        rho = self.rate if self.kind in ("exponential", "product") else 0.0
        alpha = self.alpha if self.kind in ("power-log", "product") else 0.0
        beta = self.beta if self.kind in ("power-log", "product") else 0.0
        return rho, alpha, beta

    def time_value(self, t):
        rho, alpha, beta = self._exponents()
        return TimeProfile(1.0, rho, alpha, beta).value(t) * self.amplitude

    def value(self, x, t):
        sval = self.spatial.sample(x) if self.spatial is not None else 1.0
        return self.time_value(t) * sval

    def profile(self) -> TimeProfile:
        rho, alpha, beta = self._exponents()
        return TimeProfile(self.amplitude, rho, alpha, beta)

    def spatial_bounds(self) -> tuple[float, float]:
        if self.spatial is None:
            return 1.0, 1.0
        return self.spatial.lower, self.spatial.upper

    def bounds(self) -> "CoefficientBounds":
        lo, hi = self.spatial_bounds()
        base = self.profile()
        return CoefficientBounds(lower=base.scaled(lo), upper=base.scaled(hi), descriptor=self)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "amplitude": self.amplitude}
        if self.kind in ("exponential", "product"):
            out["rate"] = self.rate
        if self.kind in ("power-log", "product"):
            out["alpha"] = self.alpha
            out["beta"] = self.beta
        if self.spatial is not None:
            out["spatial"] = {
                "label": self.spatial.label,
                "lower": self.spatial.lower,
                "upper": self.spatial.upper,
            }
        return out


def constant(value: float) -> CoefficientDescriptor:
    return CoefficientDescriptor("constant", value)


@dataclass(frozen=True)
class CoefficientBounds:
    """Uniform-in-space envelopes of one coefficient as time profiles.

    For the reaction coefficient these are inf_x c and sup_x c; for a kernel
    they are inf over the boundary-point/interior pair and the matching sup.
    The absorption-weighted kernel envelopes are formed against a second
    bounds object via :func:`weighted_profile` and friends.
    """

    lower: TimeProfile
    upper: TimeProfile
    descriptor: Optional[CoefficientDescriptor] = None

    def lower_value(self, t):
        return self.lower.value(t)

    def upper_value(self, t):
        return self.upper.value(t)


# ---------------------------------------------------------------------------
# Absorption weight  w(t) = exp(-kappa * int_0^t c)
# ---------------------------------------------------------------------------


class WeightClass:
    """Decay classes of exp(-kappa * cumulative(c)) for family profiles c.

    EXACT classes keep the weighted kernel inside the profile family; the
    remaining classes order the weight against every family member, which is
    all the tail decisions need.
    """

    ONE = "one"                      # c integrates to zero
    EXACT_EXP = "exact-exp"          # weight is exp(-kappa*amp*t)
    EXACT_POW = "exact-pow"          # weight is (1+t)**(-kappa*amp)
    BOUNDED = "bounded"              # cumulative c is finite: weight in [w_inf, 1]
    SUPEREXP = "superexp"            # weight decays faster than any exponential
    MIDDLE = "middle"                # beats every polynomial, loses to growing exponentials
    SUBPOLY = "subpoly"              # tends to zero slower than every power
    UNDECIDED = "undecided"


def weight_class(c: TimeProfile) -> tuple[str, float]:
    """Classify exp(-kappa * int c) per unit kappa; second slot carries the rate."""
    if c.amplitude == 0.0:
        return WeightClass.ONE, 0.0
    if c.amplitude < 0.0:
        raise ValueError("absorption profile must be nonnegative")
    if c.tail_integrable():
        return WeightClass.BOUNDED, 0.0
    if c.rho == 0.0 and c.alpha == 0.0 and c.beta == 0.0:
        return WeightClass.EXACT_EXP, c.amplitude
    if c.rho == 0.0 and c.alpha == -1.0 and c.beta == 0.0:
        return WeightClass.EXACT_POW, c.amplitude
    # cumulative integral grows without bound; order its growth
    if c.rho > 0.0:
        return WeightClass.SUPEREXP, 0.0
    if c.alpha > 0.0 or (c.alpha == 0.0 and c.beta > 0.0):
        return WeightClass.SUPEREXP, 0.0
    if c.alpha == 0.0 and c.beta < 0.0:
        return WeightClass.MIDDLE, 0.0
    if -1.0 < c.alpha < 0.0:
        return WeightClass.MIDDLE, 0.0
    if c.alpha == -1.0:
        if c.beta > 0.0:
            return WeightClass.MIDDLE, 0.0
        if -1.0 < c.beta < 0.0:
            return WeightClass.SUBPOLY, 0.0
        return WeightClass.UNDECIDED, 0.0  # beta == -1: log-log growth
    return WeightClass.UNDECIDED, 0.0


def weighted_profile(k: TimeProfile, c: TimeProfile, kappa: float) -> Optional[TimeProfile]:
    """k(t)*exp(-kappa int c) as an exact family member, when it is one."""
    cls, rate = weight_class(c)
    if cls == WeightClass.ONE:
        return k
    if cls == WeightClass.EXACT_EXP:
        return TimeProfile(k.amplitude, k.rho - kappa * rate, k.alpha, k.beta)
    if cls == WeightClass.EXACT_POW:
        return TimeProfile(k.amplitude, k.rho, k.alpha - kappa * rate, k.beta)
    return None


def weighted_tail_diverges(k: TimeProfile, c: TimeProfile, kappa: float) -> Optional[bool]:
    """Whether int_0^inf k * exp(-kappa int c) dt = inf; None when undecidable."""
    if k.amplitude == 0.0:
        return False
    exact = weighted_profile(k, c, kappa)
    if exact is not None:
        return exact.tail_diverges()
    cls, _ = weight_class(c)
    if cls == WeightClass.BOUNDED:
        return k.tail_diverges()
    if cls == WeightClass.SUPEREXP:
        return False
    if cls == WeightClass.MIDDLE:
        return k.rho > 0.0
    if cls == WeightClass.SUBPOLY:
        return k.rho > 0.0 or (k.rho == 0.0 and k.alpha > -1.0)
    return None


def weighted_tail_integrable(k: TimeProfile, c: TimeProfile, kappa: float) -> Optional[bool]:
    div = weighted_tail_diverges(k, c, kappa)
    return None if div is None else not div


def weighted_limit(k: TimeProfile, c: TimeProfile, kappa: float) -> Optional[str]:
    """Limit at infinity of k * exp(-kappa int c); None when undecidable."""
    if k.amplitude == 0.0:
        return Tail.ZERO
    exact = weighted_profile(k, c, kappa)
    if exact is not None:
        return exact.limit_at_infinity()
    cls, _ = weight_class(c)
    if cls == WeightClass.BOUNDED:
        lim = k.limit_at_infinity()
        # weight has a positive finite limit, so the class is preserved
        return lim
    if cls == WeightClass.SUPEREXP:
        return Tail.ZERO
    if cls == WeightClass.MIDDLE:
        return Tail.INFINITE if k.rho > 0.0 else Tail.ZERO
    if cls == WeightClass.SUBPOLY:
        if k.rho > 0.0 or (k.rho == 0.0 and k.alpha > 0.0):
            return Tail.INFINITE
        return Tail.ZERO
    return None


def weighted_value(k: TimeProfile, c: TimeProfile, kappa: float, t) -> np.ndarray:
    """Pointwise k(t) * exp(-kappa * int_0^t c)."""
    exact = weighted_profile(k, c, kappa)
    if exact is not None:
        return exact.value(t)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    cum = np.array([c.integral(tv) for tv in ts])
    out = k.value(ts) * np.exp(-kappa * cum)
    return out if np.ndim(t) else float(out[0])


def weighted_integral(k: TimeProfile, c: TimeProfile, kappa: float, t1: float, t0: float = 0.0) -> float:
    """int_{t0}^{t1} k * exp(-kappa int_0^tau c) dtau to quadrature accuracy."""
    exact = weighted_profile(k, c, kappa)
    if exact is not None:
        return exact.integral(t1, t0)
    if k.amplitude == 0.0 or t1 == t0:
        return 0.0

    def integrand(tau):
        return float(k.value(tau)) * math.exp(-kappa * c.integral(tau))

    val, _ = integrate.quad(integrand, t0, t1, epsabs=1e-14, epsrel=1e-12, limit=400)
    return val


def windowed_smoothing_constant(
    f: Callable[[float], float], t0: float, t_values
) -> float:
    """sup over given t of int_{t-t0}^{t} f(tau)/sqrt(t-tau) dtau.

    The substitution tau = t - q*q removes the endpoint singularity.
    """
    best = 0.0
    for t in np.atleast_1d(t_values):
        val, _ = integrate.quad(
            lambda q, tt=float(t): 2.0 * f(tt - q * q),
            0.0,
            math.sqrt(t0),
            epsabs=1e-12,
            epsrel=1e-10,
            limit=200,
        )
        best = max(best, val)
    return best

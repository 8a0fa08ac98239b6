"""Theorem-backed classification of (p, l, c, k) into qualitative regimes.

Every verdict cites at least one entry of the :data:`RULES` catalog, the
package's registry of sufficient conditions.  The decision procedure only
claims a verdict when the coefficient descriptors lie in the closed families
for which the underlying improper-integral conditions are decidable; anything
outside comes back ``UNKNOWN`` rather than guessed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import optimize

from .coefficients import (
    CoefficientBounds,
    Tail,
    TimeProfile,
    weighted_integral,
    weighted_limit,
    weighted_tail_diverges,
    weighted_tail_integrable,
)
from .errors import HypothesisNotMetError, NoSolutionError
from .problem import ProblemSpec

__all__ = [
    "RegimeVerdict",
    "RegimePrediction",
    "RULES",
    "classify_regime",
    "classify_spec",
    "blowup_time_bound",
    "psi_height_infimum",
]


class RegimeVerdict(str, Enum):
    GLOBAL_ALL_DATA = "GlobalAllData"
    BLOW_UP_LARGE_DATA = "BlowUpLargeData"
    SMALL_DATA_GLOBAL = "SmallDataGlobal"
    ALL_NONTRIVIAL_BLOW_UP = "AllNontrivialBlowUp"
    CONDITIONAL_EIGEN_RATIO = "ConditionalEigenRatio"
    UNKNOWN = "Unknown"


# Sufficient conditions the classifier can invoke.  Slugs are stable
# identifiers used in records and tests.
RULES = {
    "G1": "global for every datum: boundary coupling at most linear (l <= 1)",
    "G2": "global for every datum: absorption order beats coupling (1 < l < p, inf c > 0)",
    "B1": "blow-up for large data: superlinear coupling with positive kernel (l > max(1, p))",
    "S1": "small data global: sublinear absorption positive at start (p < 1, l > 1)",
    "A1": "every nontrivial datum blows up: weighted kernel mass diverges (p = 1, l > 1)",
    "S2": "small data global and bounded: weighted kernel bound integrable with heat smoothing (p = 1, l > 1)",
    "A2": "every nontrivial datum blows up: kernel outgrows the absorption power (l > p > 1)",
    "S3": "small data global: kernel dominated by the matching absorption power (l > p > 1)",
    "C1": "conditional: global when the absorption/kernel ratio is large (l = p > 1)",
    "C2": "conditional: blow-up for large data when the boundary ratio is small (l = p > 1)",
}

_GLOBAL_VERDICTS = (RegimeVerdict.GLOBAL_ALL_DATA, RegimeVerdict.SMALL_DATA_GLOBAL)
_BLOWUP_VERDICTS = (RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP, RegimeVerdict.BLOW_UP_LARGE_DATA)


@dataclass(frozen=True)
class RegimePrediction:
    """Strongest verdict with citations, plus compatible secondary findings."""

    verdict: RegimeVerdict
    citations: tuple[str, ...]
    secondary: tuple[tuple[RegimeVerdict, tuple[str, ...]], ...] = ()
    blow_up_time_bound: Optional[float] = None
    lambda_under: Optional[float] = None
    lambda_bar: Optional[float] = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.verdict is not RegimeVerdict.UNKNOWN and not self.citations:
            raise ValueError("a committed verdict must cite at least one rule")

    @property
    def verdicts(self) -> tuple[RegimeVerdict, ...]:
        return (self.verdict,) + tuple(v for v, _ in self.secondary)

    def is_global_class(self) -> bool:
        return self.verdict in _GLOBAL_VERDICTS

    def is_blowup_class(self) -> bool:
        return self.verdict in _BLOWUP_VERDICTS

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "citations": list(self.citations),
            "secondary": [[v.value, list(c)] for v, c in self.secondary],
            "blow_up_time_bound": self.blow_up_time_bound,
            "lambda_under": self.lambda_under,
            "lambda_bar": self.lambda_bar,
            "notes": list(self.notes),
        }


def psi_height_infimum(length: float) -> float:
    """Infimum of sup of positive quadratic bump profiles on the interval.

    The admissible profiles are (x^2 - L x)/2 + K with K > L^2/8; their sup is
    K, so the infimum L^2/8 is a strict lower bound that is never attained.
    Conditions involving it are therefore tested with strict inequalities.
    """
    return length * length / 8.0


def _positive_on_halfline(profile: TimeProfile) -> bool:
    return profile.amplitude > 0.0


def _profile_inf_over_halfline(profile: TimeProfile) -> float:
    if profile.amplitude == 0.0:
        return 0.0
    lim = profile.limit_at_infinity()
    ts = np.concatenate(([0.0], np.logspace(-3, 6, 400)))
    low = float(np.min(profile.value(ts)))
    if lim == Tail.ZERO:
        return 0.0
    return low


def _profile_sup_over_halfline(profile: TimeProfile) -> float:
    if profile.amplitude == 0.0:
        return 0.0
    lim = profile.limit_at_infinity()
    if lim == Tail.INFINITE:
        return math.inf
    ts = np.concatenate(([0.0], np.logspace(-3, 6, 400)))
    return float(np.max(profile.value(ts)))


def classify_regime(
    p: float,
    l: float,
    c_bounds: CoefficientBounds,
    k_bounds: CoefficientBounds,
    *,
    domain_length: float = 1.0,
    u0_mass: Optional[float] = None,
) -> RegimePrediction:
    """Map exponents and coefficient envelopes to the strongest verdict.

    ``c_bounds``/``k_bounds`` carry the uniform-in-space lower/upper profiles
    of the absorption coefficient and the boundary kernel.  When ``u0_mass``
    is given and the divergent-kernel-mass rule fires, the prediction carries
    the explicit blow-up time bound.
    """
    if not (p > 0.0 and l > 0.0):
        raise HypothesisNotMetError("classification needs p > 0 and l > 0")

    c_lo, c_hi = c_bounds.lower, c_bounds.upper
    k_lo, k_hi = k_bounds.lower, k_bounds.upper
    kappa = l - 1.0
    notes: list[str] = []

    # boundary coupling at most linear: global regardless of c and k
    if l <= 1.0:
        return RegimePrediction(RegimeVerdict.GLOBAL_ALL_DATA, ("G1",))

    # absorption of strictly higher order, uniformly positive
    if 1.0 < l < p and _positive_on_halfline(c_lo):
        return RegimePrediction(RegimeVerdict.GLOBAL_ALL_DATA, ("G2",))

    kernel_positive_now = k_lo.amplitude > 0.0

    if p == 1.0 and l > 1.0:
        diverges = weighted_tail_diverges(k_lo, c_hi, kappa)
        if diverges:
            bound = None
            if u0_mass is not None and u0_mass > 0.0:
                bound = _bound_from_profiles(
                    [k_lo, k_lo], c_hi, l, domain_length, u0_mass
                )
            return RegimePrediction(
                RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP,
                ("A1",),
                blow_up_time_bound=bound,
            )
        integrable = weighted_tail_integrable(k_hi, c_lo, kappa)
        settles = weighted_limit(k_hi, c_lo, kappa)
        if integrable and settles != Tail.INFINITE:
            # within the closed families an integrable, bounded weighted bound
            # also satisfies the moving-window smoothing condition
            secondary = (
                ((RegimeVerdict.BLOW_UP_LARGE_DATA, ("B1",)),)
                if kernel_positive_now
                else ()
            )
            return RegimePrediction(
                RegimeVerdict.SMALL_DATA_GLOBAL, ("S2",), secondary=secondary
            )
        if diverges is None or integrable is None:
            notes.append("weighted kernel tail undecidable for this coefficient family")
        if kernel_positive_now:
            return RegimePrediction(
                RegimeVerdict.BLOW_UP_LARGE_DATA, ("B1",), notes=tuple(notes)
            )
        return RegimePrediction(RegimeVerdict.UNKNOWN, (), notes=tuple(notes))

    if p < 1.0 and l > 1.0:
        entries: list[tuple[RegimeVerdict, tuple[str, ...]]] = []
        if kernel_positive_now:
            entries.append((RegimeVerdict.BLOW_UP_LARGE_DATA, ("B1",)))
        if float(np.asarray(c_lo.value(0.0))) > 0.0:
            entries.append((RegimeVerdict.SMALL_DATA_GLOBAL, ("S1",)))
        if not entries:
            return RegimePrediction(RegimeVerdict.UNKNOWN, ())
        head, *rest = entries
        return RegimePrediction(head[0], head[1], secondary=tuple(rest))

    if l > p > 1.0:
        return _classify_superlinear_gap(
            p, l, c_lo, c_hi, k_lo, k_hi, domain_length, kernel_positive_now, notes
        )

    if l == p > 1.0:
        lam_under = _lambda_under(c_lo, k_hi)
        lam_bar = _lambda_bar(c_bounds, k_bounds, domain_length)
        return RegimePrediction(
            RegimeVerdict.CONDITIONAL_EIGEN_RATIO,
            ("C1", "C2"),
            lambda_under=lam_under,
            lambda_bar=lam_bar,
        )

    return RegimePrediction(RegimeVerdict.UNKNOWN, (), notes=tuple(notes))


def _classify_superlinear_gap(p, l, c_lo, c_hi, k_lo, k_hi, length, kernel_positive, notes):
    """The stratum l > p > 1: kernel growth against absorption growth."""
    m0 = psi_height_infimum(length)
    ratio_pow = (1.0 - l) / (p - 1.0)  # negative

    # blow-up of all nontrivial data: kernel outgrows the absorption power
    fires_a2 = False
    if c_hi.amplitude > 0.0 and k_lo.amplitude > 0.0:
        # direct comparison against the absorption upper envelope
        if c_hi.rho > -(p - 1.0) / m0:
            ratio = k_lo * c_hi.powered(ratio_pow)
            fires_a2 = ratio.limit_at_infinity() == Tail.INFINITE
        if not fires_a2 and c_hi.rho < 0.0:
            # replace the envelope by a slower-decaying pure exponential; an
            # admissible decay rate must leave the strict window below the
            # profile-height threshold
            eps_hi = min((p - 1.0) / m0, -c_hi.rho)
            eps_lo = max(0.0, -k_lo.rho * (p - 1.0) / (l - 1.0))
            fires_a2 = eps_lo < eps_hi
    elif c_hi.amplitude == 0.0 and k_lo.amplitude > 0.0:
        # no absorption at all: any small exponential envelope works if the
        # kernel does not decay essentially faster
        fires_a2 = -k_lo.rho * (p - 1.0) / (l - 1.0) < (p - 1.0) / m0
    if fires_a2:
        return RegimePrediction(RegimeVerdict.ALL_NONTRIVIAL_BLOW_UP, ("A2",))

    # small data global: kernel dominated by the matching absorption power
    fires_s3 = False
    if c_lo.amplitude > 0.0:
        if c_lo.rho <= 0.0:
            ratio2 = k_hi * c_lo.powered(-(l - 1.0) / (p - 1.0))
            fires_s3 = ratio2.limit_at_infinity() != Tail.INFINITE
        else:
            # growing absorption floor: a positive constant envelope below it
            # reduces the condition to a bounded kernel
            fires_s3 = k_hi.bounded_on_halfline()
    entries: list[tuple[RegimeVerdict, tuple[str, ...]]] = []
    if fires_s3:
        entries.append((RegimeVerdict.SMALL_DATA_GLOBAL, ("S3",)))
    if kernel_positive:
        entries.append((RegimeVerdict.BLOW_UP_LARGE_DATA, ("B1",)))
    if not entries:
        return RegimePrediction(RegimeVerdict.UNKNOWN, (), notes=tuple(notes))
    head, *rest = entries
    return RegimePrediction(head[0], head[1], secondary=tuple(rest), notes=tuple(notes))


def _lambda_under(c_lo: TimeProfile, k_hi: TimeProfile) -> float:
    inf_c = _profile_inf_over_halfline(c_lo)
    sup_k = _profile_sup_over_halfline(k_hi)
    if sup_k == 0.0:
        return math.inf
    if math.isinf(sup_k):
        return 0.0
    return inf_c / sup_k


def _lambda_bar(c_bounds: CoefficientBounds, k_bounds: CoefficientBounds, length: float) -> float:
    """sup of c over the boundary at t = 0 against inf of k between endpoints."""
    ends = np.array([0.0, length])
    c_desc, k_desc = c_bounds.descriptor, k_bounds.descriptor
    if c_desc is not None:
        sup_c0 = float(np.max(c_desc.value(ends, 0.0) * np.ones(2)))
    else:
        sup_c0 = float(np.asarray(c_bounds.upper.value(0.0)))
    if k_desc is not None:
        inf_k0 = float(np.min(k_desc.value(ends, 0.0) * np.ones(2)))
    else:
        inf_k0 = float(np.asarray(k_bounds.lower.value(0.0)))
    if inf_k0 == 0.0:
        return math.inf
    return sup_c0 / inf_k0


def classify_spec(spec: ProblemSpec, u0_mass: Optional[float] = None) -> RegimePrediction:
    """Classify a full problem spec, aggregating the two endpoint kernels."""
    c_bounds = spec.c.bounds()
    k_bounds = CoefficientBounds(
        lower=spec.kernel_lower_profile(),
        upper=spec.kernel_upper_profile(),
        descriptor=spec.k_left if spec.k_left is spec.k_right else None,
    )
    return classify_regime(
        spec.p,
        spec.l,
        c_bounds,
        k_bounds,
        domain_length=spec.domain.length,
        u0_mass=u0_mass,
    )


def _bound_from_profiles(k_lower_per_end, c_upper, l, length, u0_mass):
    try:
        return _solve_bound(k_lower_per_end, c_upper, l, length, u0_mass)
    except NoSolutionError:
        return None


def _solve_bound(k_lower_per_end, c_upper, l, length, u0_mass) -> float:
    kappa = l - 1.0
    target = (1.0 / kappa) * (length * u0_mass) ** (-kappa)

    def lhs(T: float) -> float:
        return sum(weighted_integral(k, c_upper, kappa, T) for k in k_lower_per_end)

    # bracket the root by doubling; detect saturation below the target
    t_hi = 1e-6
    prev = -1.0
    for _ in range(260):
        val = lhs(t_hi)
        if val >= target:
            break
        if prev >= 0.0 and val - prev <= 1e-14 * max(target, 1.0):
            raise NoSolutionError(
                "weighted kernel mass saturates below the blow-up threshold"
            )
        prev = val
        t_hi *= 2.0
    else:
        raise NoSolutionError("no finite time reaches the blow-up threshold")

    t_lo = 0.0 if t_hi == 1e-6 else t_hi / 2.0
    root = optimize.brentq(
        lambda T: lhs(T) - target, t_lo, t_hi, xtol=1e-300, rtol=1e-12, maxiter=200
    )
    return float(root)


def blowup_time_bound(spec: ProblemSpec, u0_mass: float) -> float:
    """Explicit upper bound for the blow-up time in the linear-absorption stratum.

    Solves  int_0^T sum_endpoints [inf_y k * exp(-(l-1) int_0^t sup c)] dt
          = (l-1)^{-1} (|domain| * u0_mass)^{-(l-1)}
    for T, to a relative tolerance of 1e-10 (closed forms where the family
    admits them, bracketed root solving otherwise).
    """
    if spec.p != 1.0 or spec.l <= 1.0:
        raise HypothesisNotMetError("the bound needs p = 1 and l > 1")
    if not (u0_mass > 0.0):
        raise HypothesisNotMetError("the bound needs positive initial mass")
    c_hi = spec.c.bounds().upper
    k_ends = [
        spec.k_left.profile().scaled(spec.k_left.spatial_bounds()[0]),
        spec.k_right.profile().scaled(spec.k_right.spatial_bounds()[0]),
    ]
    return _solve_bound(k_ends, c_hi, spec.l, spec.domain.length, u0_mass)

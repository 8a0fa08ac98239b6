"""Numerical laboratory for a semilinear heat equation with nonlinear nonlocal flux."""
from .coefficients import (
    CoefficientBounds,
    CoefficientDescriptor,
    SpatialModulation,
    TimeProfile,
)
from .discretization import Grid, GridState, boundary_flux, discrete_laplacian, rhs
from .errors import (
    CertificateInfeasibleError,
    ConfigError,
    FitDegenerateError,
    HypothesisNotMetError,
    InsufficientWindowError,
    InvalidProblemError,
    NlheatError,
    NonConvergenceError,
    NoSolutionError,
    SandwichViolationError,
)
from .problem import (
    Domain1D,
    InitialDatum,
    ProblemSpec,
    ValidationReport,
    constant_datum,
    cosine_datum,
    psi_datum,
    validate,
)
from .regimes import (
    RegimePrediction,
    RegimeVerdict,
    blowup_time_bound,
    classify_regime,
    classify_spec,
)
from .timestepper import (
    BlowupEstimate,
    RunKind,
    RunOutcome,
    StepControl,
    Trajectory,
    estimate_blowup_time,
    run,
    step,
)

__version__ = "0.1.0"

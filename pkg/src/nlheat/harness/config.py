"""Strict TOML run configuration.

Unknown keys are errors, not warnings: the regime conditions are sensitive to
exactly these fields, and a silently ignored typo ("ampltude") would change
the experiment.  The schema is versioned; see the package README for a
commented example.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..coefficients import CoefficientDescriptor
from ..discretization import Grid
from ..errors import ConfigError
from ..problem import InitialDatum, ProblemSpec, constant_datum, cosine_datum, psi_datum
from ..timestepper import StepControl

SCHEMA_VERSION = 1

_COEFF_KEYS = {"kind", "amplitude", "rate", "alpha", "beta"}
_U0_KEYS = {"kind", "value", "offset", "amplitude", "scale", "additive_constant"}
_PROBLEM_KEYS = {"p", "l", "length", "c", "k", "k_left", "k_right", "u0"}
_GRID_KEYS = {"n"}
_CONTROL_KEYS = {
    "safety",
    "dt_max",
    "dt_floor",
    "u_cap",
    "err_tol",
    "blow_scale",
    "fixed_dt",
    "sample_dt",
    "sample_growth",
    "max_steps",
    "pin_limit",
    "max_samples",
}
_RUN_KEYS = {"horizon", "name"}
_MONITOR_KEYS = {"psi_additive_constant"}
_TOP_KEYS = {"schema_version", "problem", "grid", "control", "run", "monitors"}


@dataclass
class RunSetup:
    """Everything one run needs, resolved from a config mapping."""

    spec: ProblemSpec
    grid: Grid
    control: StepControl
    horizon: float
    name: str = "run"
    psi_additive_constant: Optional[float] = None
    raw: dict = field(default_factory=dict)


def _reject_unknown(section: dict, allowed: set, path: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        listed = ", ".join(sorted(f"{path}.{k}" for k in unknown))
        raise ConfigError(f"unknown config key(s): {listed}")


def _coefficient(section: Any, path: str) -> CoefficientDescriptor:
    if not isinstance(section, dict):
        raise ConfigError(f"{path} must be a table")
    _reject_unknown(section, _COEFF_KEYS, path)
    kind = section.get("kind", "constant")
    try:
        return CoefficientDescriptor(
            kind=kind,
            amplitude=float(section.get("amplitude", 0.0)),
            rate=float(section.get("rate", 0.0)),
            alpha=float(section.get("alpha", 0.0)),
            beta=float(section.get("beta", 0.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _initial_datum(section: Any, length: float, path: str) -> InitialDatum:
    if not isinstance(section, dict):
        raise ConfigError(f"{path} must be a table")
    _reject_unknown(section, _U0_KEYS, path)
    kind = section.get("kind", "constant")
    if kind == "constant":
        return constant_datum(float(section.get("value", 1.0)))
    if kind == "cosine":
        return cosine_datum(
            float(section.get("offset", 2.0)), float(section.get("amplitude", 1.0)), length
        )
    if kind == "psi":
        return psi_datum(
            float(section.get("scale", 1.0)),
            float(section.get("additive_constant", length * length / 4.0)),
            length,
        )
    raise ConfigError(f"{path}.kind: unknown initial datum kind {kind!r}")


def parse_config(data: dict) -> RunSetup:
    """Validate a parsed mapping and build the run setup."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    _reject_unknown(data, _TOP_KEYS, "<root>")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )
    if "problem" not in data:
        raise ConfigError("missing [problem] section")
    prob = data["problem"]
    _reject_unknown(prob, _PROBLEM_KEYS, "problem")
    for key in ("p", "l"):
        if key not in prob:
            raise ConfigError(f"problem.{key} is required")
    length = float(prob.get("length", 1.0))
    c = _coefficient(prob.get("c", {"kind": "constant", "amplitude": 0.0}), "problem.c")
    if "k" in prob and ("k_left" in prob or "k_right" in prob):
        raise ConfigError("give either problem.k or problem.k_left/k_right, not both")
    if "k_left" in prob or "k_right" in prob:
        if not ("k_left" in prob and "k_right" in prob):
            raise ConfigError("problem.k_left and problem.k_right must come together")
        k = (
            _coefficient(prob["k_left"], "problem.k_left"),
            _coefficient(prob["k_right"], "problem.k_right"),
        )
    else:
        k = _coefficient(prob.get("k", {"kind": "constant", "amplitude": 0.0}), "problem.k")
    u0 = _initial_datum(prob.get("u0", {"kind": "constant", "value": 1.0}), length, "problem.u0")
    try:
        spec = ProblemSpec.build(
            p=float(prob["p"]), l=float(prob["l"]), c=c, k=k, u0=u0, length=length
        )
    except Exception as exc:
        raise ConfigError(f"problem: {exc}") from exc

    grid_sec = data.get("grid", {})
    _reject_unknown(grid_sec, _GRID_KEYS, "grid")
    try:
        grid = Grid(n=int(grid_sec.get("n", 400)), length=length)
    except Exception as exc:
        raise ConfigError(f"grid: {exc}") from exc

    ctrl_sec = dict(data.get("control", {}))
    _reject_unknown(ctrl_sec, _CONTROL_KEYS, "control")
    for int_key in ("max_steps", "pin_limit", "max_samples"):
        if int_key in ctrl_sec:
            ctrl_sec[int_key] = int(ctrl_sec[int_key])
    if "dt_max" in ctrl_sec and isinstance(ctrl_sec["dt_max"], str):
        raise ConfigError("control.dt_max must be a number")
    try:
        control = StepControl(**ctrl_sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"control: {exc}") from exc

    run_sec = data.get("run", {})
    _reject_unknown(run_sec, _RUN_KEYS, "run")
    horizon = float(run_sec.get("horizon", 10.0))
    if not (horizon > 0.0 and math.isfinite(horizon)):
        raise ConfigError("run.horizon must be positive and finite")
    name = str(run_sec.get("name", "run"))

    mon_sec = data.get("monitors", {})
    _reject_unknown(mon_sec, _MONITOR_KEYS, "monitors")
    psi_const = mon_sec.get("psi_additive_constant")

    return RunSetup(
        spec=spec,
        grid=grid,
        control=control,
        horizon=horizon,
        name=name,
        psi_additive_constant=float(psi_const) if psi_const is not None else None,
        raw=data,
    )


def load_config(path) -> RunSetup:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    return parse_config(data)


def setup_from_dict(data: dict) -> RunSetup:
    """Build a setup from an in-memory mapping (used by sweeps and replay)."""
    return parse_config(data)

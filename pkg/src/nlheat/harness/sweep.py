"""Parameter sweeps over (p, l, amplitudes, datum scale) with agreement audit.

Each point is an independent run executed on a worker pool; the manifest is
assembled by the parent in point order, so its content does not depend on the
parallelism degree or scheduling.  Failures are per-point statuses, never a
sweep abort.
"""
from __future__ import annotations

import copy
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, NlheatError, NonConvergenceError
from .config import SCHEMA_VERSION, setup_from_dict
from .records import run_and_record

_PLAN_TOP_KEYS = {"schema_version", "base", "sweep"}
_SWEEP_KEYS = {"mode", "p", "l", "c_amplitude", "k_amplitude", "u0_scale", "points"}
_POINT_KEYS = {"p", "l", "c_amplitude", "k_amplitude", "u0_scale", "control"}

_GLOBAL_VERDICTS = {"GlobalAllData", "SmallDataGlobal"}


@dataclass
class SweepPlan:
    """Deduplicated list of parameter points over a shared base config."""

    base: dict
    points: list[dict]

    def __len__(self) -> int:
        return len(self.points)


def _point_key(pt: dict) -> tuple:
    return tuple(
        (k, round(float(v), 12)) for k, v in sorted(pt.items()) if k != "control"
    )


def parse_plan(data: dict) -> SweepPlan:
    if set(data) - _PLAN_TOP_KEYS:
        raise ConfigError(f"unknown plan key(s): {sorted(set(data) - _PLAN_TOP_KEYS)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"plan schema_version must be {SCHEMA_VERSION}")
    base = data.get("base")
    if not isinstance(base, dict):
        raise ConfigError("plan needs a [base] run config table")
    setup_from_dict(base)  # validate the base eagerly
    sweep = data.get("sweep", {})
    if set(sweep) - _SWEEP_KEYS:
        raise ConfigError(f"unknown sweep key(s): {sorted(set(sweep) - _SWEEP_KEYS)}")
    mode = sweep.get("mode", "cartesian")
    points: list[dict] = []
    if mode == "cartesian":
        axes = {
            name: [float(v) for v in sweep[name]]
            for name in ("p", "l", "c_amplitude", "k_amplitude", "u0_scale")
            if name in sweep
        }
        if not axes:
            return SweepPlan(base=base, points=[])
        names = sorted(axes)
        def expand(i):
            if i == len(names):
                yield {}
                return
            for rest in expand(i + 1):
                for v in axes[names[i]]:
                    yield {names[i]: v, **rest}
        points = list(expand(0))
    elif mode == "points":
        for pt in sweep.get("points", []):
            if set(pt) - _POINT_KEYS:
                raise ConfigError(f"unknown point key(s): {sorted(set(pt) - _POINT_KEYS)}")
            points.append(dict(pt))
    else:
        raise ConfigError(f"unknown sweep mode {mode!r}")

    seen = set()
    unique = []
    for pt in points:
        key = _point_key(pt)
        if key in seen:
            continue
        seen.add(key)
        unique.append(pt)
    unique.sort(key=_point_key)
    return SweepPlan(base=base, points=unique)


def load_plan(path) -> SweepPlan:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"plan file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"plan does not parse: {exc}") from exc
    return parse_plan(data)


def point_config(base: dict, point: dict, index: int) -> dict:
    """Materialize one point's run config from the base."""
    cfg = copy.deepcopy(base)
    prob = cfg.setdefault("problem", {})
    if "p" in point:
        prob["p"] = point["p"]
    if "l" in point:
        prob["l"] = point["l"]
    if "c_amplitude" in point:
        prob.setdefault("c", {})["amplitude"] = point["c_amplitude"]
    if "k_amplitude" in point:
        if "k_left" in prob or "k_right" in prob:
            prob.setdefault("k_left", {})["amplitude"] = point["k_amplitude"]
            prob.setdefault("k_right", {})["amplitude"] = point["k_amplitude"]
        else:
            prob.setdefault("k", {})["amplitude"] = point["k_amplitude"]
    if "u0_scale" in point:
        u0 = prob.setdefault("u0", {"kind": "constant", "value": 1.0})
        if u0.get("kind", "constant") == "constant":
            u0["value"] = u0.get("value", 1.0) * point["u0_scale"]
        elif u0["kind"] == "cosine":
            u0["offset"] = u0.get("offset", 2.0) * point["u0_scale"]
            u0["amplitude"] = u0.get("amplitude", 1.0) * point["u0_scale"]
        else:
            u0["scale"] = u0.get("scale", 1.0) * point["u0_scale"]
    for key, val in point.get("control", {}).items():
        cfg.setdefault("control", {})[key] = val
    cfg.setdefault("run", {})["name"] = f"point-{index:04d}"
    return cfg


def agreement_status(prediction: dict, outcome: Optional[dict], horizon: float) -> str:
    """Compare a theorem-backed verdict with one observed outcome.

    A single run can only contradict a universally quantified verdict:
    observed blow-up against global-for-all-data, or survival past a certified
    blow-up deadline.  Existence and small-data verdicts are consistent with
    any single observation; reaching the horizon is consistent with every
    global verdict.
    """
    verdict = prediction.get("verdict", "Unknown")
    if verdict == "Unknown":
        return "unknown"
    if outcome is None:
        return "no-run"
    kind = outcome.get("kind")
    all_verdicts = [verdict] + [v for v, _ in prediction.get("secondary", [])]
    if kind == "BlowUp" and "GlobalAllData" in all_verdicts:
        return "contradiction"
    if kind == "GlobalToHorizon" and verdict == "AllNontrivialBlowUp":
        bound = prediction.get("blow_up_time_bound")
        if bound is not None and horizon >= bound:
            return "contradiction"
        return "inconclusive"
    return "consistent"


def _run_point(args) -> dict:
    index, cfg = args
    entry = {"index": index, "config": cfg}
    try:
        setup = setup_from_dict(cfg)
        record, outcome, _ = run_and_record(setup, _run_point.out_dir)
        entry.update(
            status="ok",
            outcome=record.outcome,
            prediction=record.prediction,
            trajectory_hash=record.trajectory_hash,
            agreement=agreement_status(record.prediction, record.outcome, setup.horizon),
        )
    except NonConvergenceError as exc:
        entry.update(status="nonconvergence", error=str(exc), agreement="no-run")
    except NlheatError as exc:
        entry.update(status="error", error=str(exc), agreement="no-run")
    return entry


def _init_worker(out_dir):
    _run_point.out_dir = out_dir


def run_sweep(plan: SweepPlan, out_dir, parallelism: int = 1) -> dict:
    """Execute every point and write a manifest; content is schedule-invariant."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(i, point_config(plan.base, pt, i)) for i, pt in enumerate(plan.points)]

    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(
            max_workers=parallelism, initializer=_init_worker, initargs=(str(out),)
        ) as pool:
            entries = list(pool.map(_run_point, jobs))
    else:
        _init_worker(str(out))
        entries = [_run_point(job) for job in jobs]

    entries.sort(key=lambda e: e["index"])
    counts: dict[str, int] = {}
    for e in entries:
        counts[e["agreement"]] = counts.get(e["agreement"], 0) + 1
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "points": [
            {
                "index": e["index"],
                "params": plan.points[e["index"]],
                "status": e["status"],
                "outcome_kind": e.get("outcome", {}).get("kind"),
                "t_star": e.get("outcome", {}).get("t_star_estimate"),
                "verdict": e.get("prediction", {}).get("verdict"),
                "blow_up_time_bound": e.get("prediction", {}).get("blow_up_time_bound"),
                "agreement": e["agreement"],
                "trajectory_hash": e.get("trajectory_hash"),
                "error": e.get("error"),
            }
            for e in entries
        ],
        "summary": {
            "total": len(entries),
            "agreement_counts": counts,
            "contradictions": [e["index"] for e in entries if e["agreement"] == "contradiction"],
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest

"""Run records: CSV series, JSON metadata, and deterministic replay.

The series file has fixed columns (t, maxU, uLeft, uRight, interiorMax, U, J,
dt) written with shortest round-tripping float representations, so
parse(write(series)) == series exactly for finite values.  The record's
trajectory hash covers the series bytes only; wall-clock metrics live outside
the hash so replays can be compared for bit-identical dynamics.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..monitors import mass_balance_defect, track
from ..regimes import classify_spec
from ..timestepper import RunOutcome, Trajectory, run
from .config import RunSetup, setup_from_dict

RECORD_SCHEMA_VERSION = 1
SERIES_COLUMNS = ("t", "maxU", "uLeft", "uRight", "interiorMax", "U", "J", "dt")


def write_series(trajectory: Trajectory) -> str:
    """Render the sampled series as CSV text with exact float round-trip."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    cols = (
        trajectory.t,
        trajectory.max_u,
        trajectory.u_left,
        trajectory.u_right,
        trajectory.interior_max,
        trajectory.mass,
        trajectory.cumulative_lp,
        trajectory.dt,
    )
    for j in range(len(trajectory)):
        writer.writerow([repr(float(col[j])) for col in cols])
    return buf.getvalue()


def read_series(text: str) -> dict[str, np.ndarray]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != SERIES_COLUMNS:
        raise ConfigError(f"unexpected series columns {header}")
    rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows, dtype=float).reshape(len(rows), len(SERIES_COLUMNS))
    return {name: arr[:, i].copy() for i, name in enumerate(SERIES_COLUMNS)}


def series_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class RunRecord:
    """Replayable snapshot of one run: inputs, outcome, and derived reports."""

    inputs: dict
    outcome: dict
    prediction: dict
    functionals: dict
    certificates: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    trajectory_hash: str = ""
    series_file: str = "series.csv"
    schema_version: int = RECORD_SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": self.schema_version,
                "inputs": self.inputs,
                "outcome": self.outcome,
                "prediction": self.prediction,
                "functionals": self.functionals,
                "certificates": self.certificates,
                "metrics": self.metrics,
                "trajectory_hash": self.trajectory_hash,
                "series_file": self.series_file,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        data = json.loads(text)
        return cls(
            inputs=data["inputs"],
            outcome=data["outcome"],
            prediction=data["prediction"],
            functionals=data["functionals"],
            certificates=data.get("certificates", []),
            metrics=data.get("metrics", {}),
            trajectory_hash=data["trajectory_hash"],
            series_file=data.get("series_file", "series.csv"),
            schema_version=data.get("schema_version", RECORD_SCHEMA_VERSION),
        )


def execute(setup: RunSetup) -> tuple[RunRecord, RunOutcome, str]:
    """Run, monitor, and classify one setup; returns record, outcome, series."""
    started = time.perf_counter()
    outcome = run(setup.spec, setup.grid, setup.control, setup.horizon)
    wall = time.perf_counter() - started
    series_text = write_series(outcome.trajectory)

    u0_mass = float(np.dot(setup.grid.weights, setup.spec.u0.value(setup.grid.nodes)))
    prediction = classify_spec(setup.spec, u0_mass=u0_mass)

    m = setup.psi_additive_constant
    fs = track(outcome.trajectory, setup.spec, setup.grid, m=m)
    functionals = {
        "mass_initial": float(fs.mass[0]),
        "mass_final": float(fs.mass[-1]),
        "cumulative_lp_final": float(fs.cumulative_lp[-1]),
        "mass_balance_defect": mass_balance_defect(fs),
        "damping_constant": fs.m,
    }

    record = RunRecord(
        inputs=setup.raw,
        outcome=outcome.to_dict(),
        prediction=prediction.to_dict(),
        functionals=functionals,
        metrics={
            "wall_seconds": wall,
            "steps_accepted": outcome.steps_accepted,
            "steps_rejected": outcome.steps_rejected,
            "samples": len(outcome.trajectory),
        },
        trajectory_hash=series_hash(series_text),
    )
    return record, outcome, series_text


def run_and_record(setup: RunSetup, out_dir) -> tuple[RunRecord, RunOutcome, Path]:
    """Execute a setup and persist record.json plus series.csv under out_dir."""
    record, outcome, series_text = execute(setup)
    target = Path(out_dir) / setup.name
    target.mkdir(parents=True, exist_ok=True)
    (target / record.series_file).write_text(series_text)
    (target / "record.json").write_text(record.to_json())
    return record, outcome, target


def replay(record_path) -> tuple[RunRecord, bool]:
    """Re-execute a stored record's inputs and compare trajectory hashes."""
    path = Path(record_path)
    original = RunRecord.from_json(path.read_text())
    setup = setup_from_dict(original.inputs)
    fresh, _, _ = execute(setup)
    return fresh, fresh.trajectory_hash == original.trajectory_hash

"""Front end: config files, run records, sweeps, convergence studies, CLI."""
from .config import RunSetup, load_config, parse_config, setup_from_dict
from .records import RunRecord, replay, run_and_record, read_series, write_series
from .sweep import SweepPlan, load_plan, run_sweep, agreement_status
from .convergence import ConvergenceReport, convergence_suite, blowup_cauchy

__all__ = [
    "RunSetup",
    "load_config",
    "parse_config",
    "setup_from_dict",
    "RunRecord",
    "replay",
    "run_and_record",
    "read_series",
    "write_series",
    "SweepPlan",
    "load_plan",
    "run_sweep",
    "agreement_status",
    "ConvergenceReport",
    "convergence_suite",
    "blowup_cauchy",
]

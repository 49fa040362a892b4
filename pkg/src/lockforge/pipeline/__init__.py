from .config import Ablations, BenchmarkSpec, ConfigError, RunConfig, SandboxTemplate, Thresholds, load_config
from .engine import HALT_BUDGET, HALT_EXAM, HALT_PARSE, HALT_SCORE, HALT_SPAWN, run_pipeline
from .record import read_record, record_fingerprint
from .report import render_report

__all__ = [
    "Ablations",
    "BenchmarkSpec",
    "ConfigError",
    "RunConfig",
    "SandboxTemplate",
    "Thresholds",
    "load_config",
    "HALT_BUDGET",
    "HALT_EXAM",
    "HALT_PARSE",
    "HALT_SCORE",
    "HALT_SPAWN",
    "run_pipeline",
    "read_record",
    "record_fingerprint",
    "render_report",
]

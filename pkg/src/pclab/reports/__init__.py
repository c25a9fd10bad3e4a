"""Configuration, orchestration and report emission."""

from .config import EXPERIMENTS, ExperimentConfig, build_config, config_digest, load_config, validate
from .run import FAIL, PASS, REJECTED, REPORT_ONLY, ClaimReport, execute, run, sweep

__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "build_config", "config_digest", "load_config", "validate",
    "FAIL", "PASS", "REJECTED", "REPORT_ONLY", "ClaimReport", "execute", "run", "sweep",
]

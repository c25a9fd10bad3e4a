"""Numerical checks of the comparison and decomposition statements."""

from .beta import BetaProfile, window_profile
from .decomposition import LambdaTrajectory, MollificationResult, decompose_lambda, source_mollification_study
from .l4 import L4Result, l4_comparison
from .maxprinciple import (
    MaxPrincipleResult,
    SupersolutionSpec,
    max_principle_experiment,
    random_admissible_config,
)
from .proportionality import ProportionalityResult, proportionality_residual, proportionality_series
from .vsequence import (
    VSequenceProblem,
    VSequenceReport,
    VSequenceState,
    feasibility_bounds,
    v_sequence_run,
    vtilde_step,
)

__all__ = [
    "BetaProfile", "window_profile", "LambdaTrajectory", "MollificationResult", "decompose_lambda",
    "source_mollification_study", "L4Result", "l4_comparison", "MaxPrincipleResult", "SupersolutionSpec",
    "max_principle_experiment", "random_admissible_config", "ProportionalityResult",
    "proportionality_residual", "proportionality_series", "VSequenceProblem", "VSequenceReport",
    "VSequenceState", "feasibility_bounds", "v_sequence_run", "vtilde_step",
]

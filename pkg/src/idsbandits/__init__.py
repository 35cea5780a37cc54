"""Offline-to-online Bayesian bandit experiments with information-directed
sampling: exact linear-Gaussian posteriors, a greedy/UCB/TS/IDS selector
family, three benchmark environments, analytic diagnostics, and a seeded
experiment harness."""

from .envs import (
    HIDDEN_MODE_ACTIONS,
    HIDDEN_MODE_REWARDS,
    LINQ_ACTIONS,
    LINQ_CANDIDATE_CLASS,
    GapConstants,
    HiddenModeEnv,
    LinearContextualEnv,
    LinearQEnv,
    LinearQInstance,
    LinearQScores,
    ModeBelief,
    RandomFeatureMap,
    build_feature_map,
    deltas_hidden,
    gains_hidden,
    ids_selects_probe,
    linear_q_scores,
    p_from_offline,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    RegretTrace,
    ResultRow,
    SelectorSpec,
    emit,
    prepare_linear_run,
    run_experiment,
    run_one,
    run_table,
    sweep_eta,
)
from .infodiag import (
    BoundBranches,
    BoundInputs,
    CoverageInputs,
    binary_entropy,
    coverage_coeff,
    elliptical_potential,
    ids_upper_bound,
    reference_ratio_constant,
    residual_info,
    residual_regret_bound,
    separation_ratio,
    ts_lower_bound,
    ts_lower_bound_threshold,
    two_branch_bound,
)
from .posterior import GaussianLinearPosterior
from .selectors import (
    SELECTOR_KINDS,
    ActionScore,
    BeliefScores,
    CandidateSet,
    mc_deltas,
    psi,
    psi_values,
    score_actions,
    select,
)

__version__ = "0.1.0"

__all__ = [
    "ActionScore",
    "BeliefScores",
    "BoundBranches",
    "BoundInputs",
    "CandidateSet",
    "CoverageInputs",
    "ExperimentConfig",
    "ExperimentResult",
    "GapConstants",
    "GaussianLinearPosterior",
    "HIDDEN_MODE_ACTIONS",
    "HIDDEN_MODE_REWARDS",
    "HiddenModeEnv",
    "LINQ_ACTIONS",
    "LINQ_CANDIDATE_CLASS",
    "LinearContextualEnv",
    "LinearQEnv",
    "LinearQInstance",
    "LinearQScores",
    "ModeBelief",
    "RandomFeatureMap",
    "RegretTrace",
    "ResultRow",
    "SELECTOR_KINDS",
    "SelectorSpec",
    "binary_entropy",
    "build_feature_map",
    "coverage_coeff",
    "deltas_hidden",
    "elliptical_potential",
    "emit",
    "gains_hidden",
    "ids_selects_probe",
    "ids_upper_bound",
    "linear_q_scores",
    "mc_deltas",
    "p_from_offline",
    "prepare_linear_run",
    "psi",
    "psi_values",
    "reference_ratio_constant",
    "residual_info",
    "residual_regret_bound",
    "run_experiment",
    "run_one",
    "run_table",
    "score_actions",
    "select",
    "separation_ratio",
    "sweep_eta",
    "ts_lower_bound",
    "ts_lower_bound_threshold",
    "two_branch_bound",
]

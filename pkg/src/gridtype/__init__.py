"""Bayesian intent decoding and typing simulation for cursor-driven grid keyboards."""

from .epoch import EpochConfig, EpochTrace, TrialOutcome, psc_check, run_trial, simulate_epoch
from .evidence import (
    CalibrationProfile,
    TrialEvidence,
    draw_trial_evidence,
    estimate_profile_accuracy,
    make_profile,
)
from .graph import (
    Action,
    BACKSPACE,
    DEFAULT_LABELS,
    NavGraph,
    PSC,
    SELECT_COMMAND,
    action_distance,
    apply_action,
    build_grid_graph,
    intent_policy,
    policy_matrix,
)
from .harness import (
    SimulationReport,
    favor_oppose_experiment,
    run_monte_carlo,
    write_report,
)
from .inference import (
    ActionDecision,
    PosteriorState,
    batch_posterior_oracle,
    decide_baseline,
    decide_joint,
    decide_marginal,
    init_epoch,
    update_posterior,
)
from .lm import NgramModel, char_prior, synthetic_prior, train_ngram, word_difficulty
from .session import DEFAULT_WORDS, SessionResult, SessionSpec, simulate_session
from .stats import welch_t_test

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionDecision",
    "BACKSPACE",
    "CalibrationProfile",
    "DEFAULT_LABELS",
    "DEFAULT_WORDS",
    "EpochConfig",
    "EpochTrace",
    "NavGraph",
    "NgramModel",
    "PSC",
    "PosteriorState",
    "SELECT_COMMAND",
    "SessionResult",
    "SessionSpec",
    "SimulationReport",
    "TrialEvidence",
    "TrialOutcome",
    "action_distance",
    "apply_action",
    "batch_posterior_oracle",
    "build_grid_graph",
    "char_prior",
    "decide_baseline",
    "decide_joint",
    "decide_marginal",
    "draw_trial_evidence",
    "estimate_profile_accuracy",
    "favor_oppose_experiment",
    "init_epoch",
    "intent_policy",
    "make_profile",
    "policy_matrix",
    "psc_check",
    "run_monte_carlo",
    "run_trial",
    "simulate_epoch",
    "simulate_session",
    "synthetic_prior",
    "train_ngram",
    "update_posterior",
    "welch_t_test",
    "word_difficulty",
    "write_report",
]

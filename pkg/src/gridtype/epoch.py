"""Trial repetition loop and character-selection epochs.

A trial draws evidence for the user's intended action, repeating (and fusing
the i.i.d. likelihoods by elementwise product) until the decoder's confidence
clears a threshold or the repetition cap is hit.  An epoch strings trials
together until a key is selected: either the decoder emits the explicit
select command, or the posterior ratio of the cursor key to its strongest
rival exceeds a threshold, or a trial cap forces selection of the current
key.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .evidence import CalibrationProfile, TrialEvidence, draw_trial_evidence
from .graph import (
    Action,
    MODES,
    NavGraph,
    PSC,
    SELECT_COMMAND,
    apply_action,
    intent_policy,
    n_action_classes,
    policy_matrix,
)
from .inference import (
    ActionDecision,
    PosteriorState,
    decide_baseline,
    decide_joint,
    decide_marginal,
    update_posterior,
)

MODELS = ("joint", "marginal", "baseline")

CONCLUDED_SELECT = "select-command"
CONCLUDED_PSC = "psc"
CONCLUDED_CAP = "trial-cap"


@dataclass(frozen=True)
class EpochConfig:
    model: str = "marginal"
    criterion: str = SELECT_COMMAND
    confidence_threshold: float = 0.9
    psc_threshold: float = 10.0
    max_repetitions: int = 5
    seconds_per_draw: float = 1.05
    max_trials_per_epoch: int = 50

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.criterion not in MODES:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.confidence_threshold < 0:
            raise ValueError("confidence_threshold must be >= 0")
        if self.psc_threshold <= 1:
            raise ValueError("psc_threshold must be > 1")
        if self.max_repetitions < 1:
            raise ValueError("max_repetitions must be >= 1")
        if self.seconds_per_draw <= 0:
            raise ValueError("seconds_per_draw must be positive")
        if self.max_trials_per_epoch < 1:
            raise ValueError("max_trials_per_epoch must be >= 1")

    @property
    def n_classes(self) -> int:
        return n_action_classes(self.criterion)


@dataclass(frozen=True)
class TrialOutcome:
    decision: ActionDecision
    repetitions: int
    elapsed_s: float
    fused_evidence: TrialEvidence


@dataclass(frozen=True)
class TrialRecord:
    cursor: int
    intent: Action
    outcome: TrialOutcome


@dataclass
class EpochTrace:
    target: int
    trials: list[TrialRecord] = field(default_factory=list)
    selected: int = -1
    correct: bool = False
    concluded_by: str = ""
    concluding_move_applied: bool = True

    @property
    def draws(self) -> int:
        return sum(t.outcome.repetitions for t in self.trials)

    def total_elapsed_s(self, seconds_per_draw: float = 1.05) -> float:
        return self.draws * seconds_per_draw


def _decide(model: str, state: PosteriorState, ev: TrialEvidence,
            policy: np.ndarray) -> ActionDecision:
    if model == "joint":
        return decide_joint(state, ev, policy)
    if model == "marginal":
        return decide_marginal(state, ev, policy)
    return decide_baseline(ev)


def run_trial(state: PosteriorState, profile: CalibrationProfile,
              true_intent: Action, cfg: EpochConfig, rng: np.random.Generator,
              policy: np.ndarray) -> TrialOutcome:
    """Draw evidence for the intended action until the decision is confident.

    Repetition likelihoods are fused in log space; the fused vector is both
    what the decision rules see and what the caller feeds to the posterior
    update afterwards.
    """
    true_intent = Action(true_intent)
    if int(true_intent) >= cfg.n_classes:
        raise ValueError(f"{true_intent.name} is not admissible under {cfg.criterion}")
    if profile.n_classes != cfg.n_classes:
        raise ValueError(
            f"profile has {profile.n_classes} classes, criterion needs {cfg.n_classes}"
        )
    log_fused = np.zeros(cfg.n_classes)
    for rep in range(1, cfg.max_repetitions + 1):
        ev = draw_trial_evidence(profile, int(true_intent), rng)
        log_fused += np.log(ev.likelihoods)
        fused = TrialEvidence(np.maximum(np.exp(log_fused - log_fused.max()), 1e-300))
        decision = _decide(cfg.model, state, fused, policy)
        if decision.confidence >= cfg.confidence_threshold:
            break
    return TrialOutcome(decision=decision, repetitions=rep,
                        elapsed_s=rep * cfg.seconds_per_draw, fused_evidence=fused)


def psc_check(posterior: np.ndarray, cursor: int, threshold: float) -> bool:
    """True when the cursor key's posterior exceeds ``threshold`` times the
    best posterior among all other keys."""
    p_cursor = posterior[cursor]
    others = np.delete(posterior, cursor)
    if len(others) == 0:
        return True
    return bool(p_cursor > threshold * others.max())


def sample_intent(g: NavGraph, cursor: int, target: int, mode: str,
                  rng: np.random.Generator) -> Action:
    """Draw the simulated user's intended action from the intent policy."""
    dist = intent_policy(g, cursor, target, mode)
    actions = list(dist)
    if len(actions) == 1:
        return actions[0]
    probs = [dist[a] for a in actions]
    return actions[int(rng.choice(len(actions), p=probs))]


def simulate_epoch(g: NavGraph, state: PosteriorState, target: int,
                   profile: CalibrationProfile, cfg: EpochConfig,
                   rng: np.random.Generator) -> EpochTrace:
    """Simulate one character-selection epoch.

    The simulated user always intends a shortest-path action toward the
    target (or select/loiter on arrival); the cursor moves by the DECODED
    action, so decoding errors genuinely derail it.  Each trial the posterior
    is updated first; under the ratio criterion the selection condition is
    evaluated both before and right after the cursor moves, so arriving on a
    key the history already favours selects it without an extra trial.
    """
    if state.mode != cfg.criterion:
        raise ValueError(f"state mode {state.mode!r} != criterion {cfg.criterion!r}")
    g._check_node(target)
    trace = EpochTrace(target=target)
    for _ in range(cfg.max_trials_per_epoch):
        cursor = state.cursor
        policy = policy_matrix(g, cursor, cfg.criterion)
        intent = sample_intent(g, cursor, target, cfg.criterion, rng)
        outcome = run_trial(state, profile, intent, cfg, rng, policy)
        state = update_posterior(state, outcome.fused_evidence, policy)
        trace.trials.append(TrialRecord(cursor=cursor, intent=intent, outcome=outcome))
        if cfg.criterion == SELECT_COMMAND:
            if outcome.decision.action == Action.SELECT:
                return _conclude(trace, cursor, CONCLUDED_SELECT, moved=False)
        else:
            if psc_check(state.posterior, cursor, cfg.psc_threshold):
                return _conclude(trace, cursor, CONCLUDED_PSC, moved=False)
        state = replace(state, cursor=apply_action(g, cursor, outcome.decision.action))
        if cfg.criterion != SELECT_COMMAND and state.cursor != cursor:
            if psc_check(state.posterior, state.cursor, cfg.psc_threshold):
                return _conclude(trace, state.cursor, CONCLUDED_PSC, moved=True)
    return _conclude(trace, state.cursor, CONCLUDED_CAP, moved=True)


def _conclude(trace: EpochTrace, selected: int, how: str, moved: bool) -> EpochTrace:
    trace.selected = selected
    trace.correct = selected == trace.target
    trace.concluded_by = how
    trace.concluding_move_applied = moved
    return trace


def replay_cursor(g: NavGraph, start: int, trace: EpochTrace) -> int:
    """Re-walk the decided actions; returns where the cursor ends up.

    When the ratio criterion fires before the concluding move, that trial's
    decided action was never applied and is skipped; in every other case
    (arrival firing, trial cap, select command's no-op move) the decided
    action of every trial replays.
    """
    cursor = start
    trials = trace.trials if trace.concluding_move_applied else trace.trials[:-1]
    for rec in trials:
        cursor = apply_action(g, cursor, rec.outcome.decision.action)
    return cursor

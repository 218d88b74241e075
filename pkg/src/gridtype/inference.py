"""Recursive Bayesian decoding of typing intent.

The decoder keeps a posterior over which key the user is heading for.  After
each trial the posterior is multiplied by the probability of the observed
evidence under every candidate target,

    post_t(T)  proportional to  post_{t-1}(T) * sum_s P(X | s) P(s | T, cursor),

where P(s | T, cursor) is the intent policy of the keyboard graph (passed in
as a policy matrix so the engine itself is graph-agnostic).  Three decision
rules turn the current trial's evidence into an action:

* ``decide_joint``    -- maximise the joint score over (action, target) pairs
                         and emit the action of the best pair;
* ``decide_marginal`` -- maximise the action score after summing targets out;
* ``decide_baseline`` -- ignore the posterior and take the likelihood argmax.

Both model-based rules share the same action-score vector (the target-summed
joint); they differ only in taking a max versus a sum over targets when
picking the action, and the reported confidence is the probability mass of
the action actually emitted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .evidence import TrialEvidence
from .graph import Action, SELECT_COMMAND

PRIOR_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PosteriorState:
    """Belief over target keys plus the cursor and trial bookkeeping."""

    posterior: np.ndarray
    cursor: int
    trial_index: int = 1
    epoch_id: int = 0
    mode: str = SELECT_COMMAND


@dataclass(frozen=True)
class ActionDecision:
    action: Action
    confidence: float
    per_action_scores: np.ndarray


def init_epoch(prior: np.ndarray, cursor: int, mode: str,
               epoch_id: int = 0) -> PosteriorState:
    """Start a character-selection epoch from a normalized context prior."""
    prior = np.asarray(prior, dtype=float)
    total = prior.sum()
    if abs(total - 1.0) > PRIOR_SUM_TOLERANCE:
        raise ValueError(f"prior sums to {total!r}, expected 1")
    if (prior < 0).any():
        raise ValueError("prior has negative entries")
    return PosteriorState(posterior=prior / total, cursor=cursor,
                          trial_index=1, epoch_id=epoch_id, mode=mode)


def _evidence_vector(ev: TrialEvidence, n_actions: int) -> np.ndarray:
    v = np.asarray(ev.likelihoods, dtype=float)
    if len(v) != n_actions:
        raise ValueError(f"evidence has {len(v)} classes, policy expects {n_actions}")
    return v


def update_posterior(state: PosteriorState, ev: TrialEvidence,
                     policy: np.ndarray) -> PosteriorState:
    """Fold one trial's evidence into the posterior and advance the trial index.

    ``policy`` is the (n_actions, n_nodes) intent-policy matrix evaluated at
    the cursor where the evidence was collected.
    """
    v = _evidence_vector(ev, policy.shape[0])
    weights = state.posterior * (v @ policy)
    total = weights.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("evidence left no posterior mass to renormalize")
    return replace(state, posterior=weights / total,
                   trial_index=state.trial_index + 1)


def decide_baseline(ev: TrialEvidence) -> ActionDecision:
    """Likelihood-only decision, no posterior involved."""
    v = np.asarray(ev.likelihoods, dtype=float)
    total = v.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("evidence vector has no mass")
    scores = v / total
    a = int(np.argmax(scores))
    return ActionDecision(action=Action(a), confidence=float(scores[a]),
                          per_action_scores=scores)


def decide_marginal(state: PosteriorState, ev: TrialEvidence,
                    policy: np.ndarray) -> ActionDecision:
    """Pick the action with the largest posterior-weighted evidence score."""
    v = _evidence_vector(ev, policy.shape[0])
    m = v * (policy @ state.posterior)
    total = m.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("decision scores have no mass")
    scores = m / total
    a = int(np.argmax(scores))
    return ActionDecision(action=Action(a), confidence=float(scores[a]),
                          per_action_scores=scores)


def decide_joint(state: PosteriorState, ev: TrialEvidence,
                 policy: np.ndarray) -> ActionDecision:
    """Pick the action of the highest-scoring (action, target) pair.

    Ties break to the lowest action index, then the lowest node index.  The
    confidence is the total probability of the emitted action, i.e. the
    target-summed joint at that action, so the repetition threshold is
    comparable across decision rules.
    """
    v = _evidence_vector(ev, policy.shape[0])
    joint = v[:, None] * policy * state.posterior[None, :]
    total = joint.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("decision scores have no mass")
    a = int(np.argmax(joint)) // joint.shape[1]
    scores = joint.sum(axis=1) / total
    return ActionDecision(action=Action(a), confidence=float(scores[a]),
                          per_action_scores=scores)


def batch_posterior_oracle(prior: np.ndarray, steps) -> np.ndarray:
    """Non-recursive posterior: the prior times the product of per-trial
    evidence mixtures, normalized once at the end.

    ``steps`` is a sequence of (policy_matrix, TrialEvidence) pairs, one per
    trial in cursor order.  Accumulates in log space so long epochs do not
    underflow; serves as the independent oracle for ``update_posterior``.
    """
    prior = np.asarray(prior, dtype=float)
    with np.errstate(divide="ignore"):
        log_w = np.log(prior)
    for policy, ev in steps:
        v = _evidence_vector(ev, policy.shape[0])
        mix = v @ policy
        with np.errstate(divide="ignore"):
            log_w = log_w + np.log(mix)
    peak = log_w.max()
    if not np.isfinite(peak):
        raise ValueError("evidence left no posterior mass to renormalize")
    w = np.exp(log_w - peak)
    return w / w.sum()

"""Typing sessions: words, context priors, and the error-correction loop.

A session types ten words separated by single spaces.  Every character is
one epoch; the language model conditions each epoch's prior on everything
typed so far.  When an epoch selects the wrong key the stray character is
erased through a corrective epoch aimed at the backspace key, then the
intended character is retried.  A word that needs more than
``max_corrections_per_word`` corrective epochs is abandoned and the session
moves on, with all the time spent still on the clock.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .epoch import EpochConfig, EpochTrace, simulate_epoch
from .evidence import CalibrationProfile
from .graph import BACKSPACE, NavGraph
from .inference import init_epoch
from .lm import NgramModel, char_prior, synthetic_prior, uniform_prior

DEFAULT_WORDS = (
    "the", "and", "with", "will", "seat",
    "between", "seen", "please", "buys", "makeup",
)

PRIOR_LM = "lm"
PRIOR_UNIFORM = "uniform"
PRIOR_FAVOR = "favor"
PRIOR_OPPOSE = "oppose"


@dataclass(frozen=True)
class SessionSpec:
    graph: NavGraph
    profile: CalibrationProfile
    config: EpochConfig
    words: tuple[str, ...] = DEFAULT_WORDS
    lm: NgramModel | None = None
    prior_mode: str = PRIOR_LM
    prior_strength: float = 0.5
    correction_prior_strength: float = 0.5
    start_cursor: int | None = None
    max_corrections_per_word: int = 10
    keep_traces: bool = False


@dataclass
class SessionResult:
    draws: int = 0
    total_time_s: float = 0.0
    chars_typed: int = 0
    wrong_selections: int = 0
    corrective_epochs: int = 0
    failed_words: list[str] = field(default_factory=list)
    typed_text: str = ""
    word_draws: list[int] = field(default_factory=list)
    traces: list[EpochTrace] = field(default_factory=list)


def _epoch_prior(spec: SessionSpec, typed: str, target: int,
                 corrective: bool) -> np.ndarray:
    if spec.prior_mode in (PRIOR_FAVOR, PRIOR_OPPOSE):
        return synthetic_prior(spec.graph, target, spec.prior_mode, spec.prior_strength)
    if corrective:
        # The controller just queued an erase, so the context for this epoch
        # is the correction itself rather than the language model, which
        # gives the backspace key only its smoothing floor.
        return synthetic_prior(spec.graph, target, PRIOR_FAVOR,
                               spec.correction_prior_strength)
    if spec.prior_mode == PRIOR_LM:
        if spec.lm is None:
            raise ValueError("prior_mode 'lm' requires a language model")
        return char_prior(spec.lm, typed)
    if spec.prior_mode == PRIOR_UNIFORM:
        return uniform_prior(spec.graph.n_nodes)
    raise ValueError(f"unknown prior mode {spec.prior_mode!r}")


def simulate_session(spec: SessionSpec, rng: np.random.Generator) -> SessionResult:
    """Type all session words; returns timing and error accounting.

    Elapsed time is carried as the integer count of evidence draws and
    converted through ``seconds_per_draw`` once, so the timing identity
    ``total_time_s == draws * seconds_per_draw`` holds exactly.
    """
    g = spec.graph
    for word in spec.words:
        for ch in word:
            g.node_of_label(ch)  # raises for characters missing from the keyboard

    result = SessionResult()
    cursor = spec.start_cursor
    if cursor is None:
        cursor = g.node_index(g.rows // 2, g.cols // 2)
    typed = ""
    committed = ""
    epoch_id = 0

    for wi, word in enumerate(spec.words):
        seq = word + (" " if wi < len(spec.words) - 1 else "")
        corrections = 0
        failed = False
        word_draws_start = result.draws
        for ch in seq:
            want = committed + ch
            while typed != want:
                if want.startswith(typed):
                    # Either ready for the intended character or re-typing
                    # characters a stray backspace erased.
                    target_label = want[len(typed)]
                    corrective = False
                else:
                    target_label = BACKSPACE
                    corrective = True
                    corrections += 1
                    if corrections > spec.max_corrections_per_word:
                        failed = True
                        break
                target = g.node_of_label(target_label)
                prior = _epoch_prior(spec, typed, target, corrective)
                state = init_epoch(prior, cursor, spec.config.criterion, epoch_id)
                trace = simulate_epoch(g, state, target, spec.profile, spec.config, rng)
                epoch_id += 1
                cursor = trace.selected
                result.draws += trace.draws
                if corrective:
                    result.corrective_epochs += 1
                if spec.keep_traces:
                    result.traces.append(trace)
                selected_label = g.label_of(trace.selected)
                if selected_label != target_label:
                    result.wrong_selections += 1
                if selected_label == BACKSPACE:
                    typed = typed[:-1]
                else:
                    typed += selected_label
            if failed:
                break
            committed = want
            result.chars_typed += 1
        if failed:
            result.failed_words.append(word)
            committed = typed
        result.word_draws.append(result.draws - word_draws_start)

    result.typed_text = typed
    result.total_time_s = result.draws * spec.config.seconds_per_draw
    return result

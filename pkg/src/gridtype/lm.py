"""Character n-gram language model supplying context priors over keyboard keys.

The model is an add-alpha smoothed n-gram with strict backoff: a context that
never occurred in the training text falls back to the distribution of the
next shorter context, down to the unigram and finally the uniform
distribution.  Every emitted distribution is strictly positive and sums to 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import BACKSPACE, DEFAULT_LABELS, NavGraph, action_distance


@dataclass
class NgramModel:
    order: int
    alpha: float
    labels: tuple[str, ...]
    counts: dict[str, np.ndarray] = field(default_factory=dict)
    _label_index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        if not self._label_index:
            self._label_index = {lab: i for i, lab in enumerate(self.labels)}

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def conditional(self, context: str) -> np.ndarray:
        """P(next label | context), backing off through shorter suffixes."""
        for k in range(min(len(context), self.order - 1), 0, -1):
            row = self.counts.get(context[-k:])
            if row is not None:
                return self._smooth(row)
        row = self.counts.get("")
        if row is not None:
            return self._smooth(row)
        return np.full(self.n_labels, 1.0 / self.n_labels)

    def _smooth(self, row: np.ndarray) -> np.ndarray:
        return (row + self.alpha) / (row.sum() + self.alpha * self.n_labels)


def normalize_text(text: str, labels) -> str:
    """Lowercase and map every character outside the model's letter set to a space.

    The model proper is trained over letters and space only; punctuation and
    backspace keys receive probability exclusively through smoothing.  Runs of
    spaces collapse to one so whitespace-heavy sources do not swamp the space
    statistics.
    """
    keep = {ch for ch in labels if ch.isalpha() or ch == " "}
    out = []
    prev_space = True
    for ch in text.lower():
        if ch not in keep:
            ch = " "
        if ch == " ":
            if prev_space:
                continue
            prev_space = True
        else:
            prev_space = False
        out.append(ch)
    return "".join(out).strip()


def train_ngram(corpus: str, order: int = 6, alpha: float = 0.1,
                labels=DEFAULT_LABELS) -> NgramModel:
    """Count n-grams of all context lengths < order over the normalized corpus."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    labels = tuple(labels)
    model = NgramModel(order=order, alpha=alpha, labels=labels)
    text = normalize_text(corpus, labels)
    idx = model._label_index
    n = len(labels)
    for i, ch in enumerate(text):
        j = idx[ch]
        for k in range(min(i, order - 1) + 1):
            ctx = text[i - k:i]
            row = model.counts.get(ctx)
            if row is None:
                row = np.zeros(n, dtype=np.int64)
                model.counts[ctx] = row
            row[j] += 1
    return model


def train_ngram_file(path, order: int = 6, alpha: float = 0.1,
                     labels=DEFAULT_LABELS) -> NgramModel:
    text = Path(path).read_text(encoding="utf-8")
    return train_ngram(text, order=order, alpha=alpha, labels=labels)


def char_prior(model: NgramModel, history: str) -> np.ndarray:
    """Prior over the next key given the typed history."""
    context = history[-(model.order - 1):] if model.order > 1 else ""
    return model.conditional(context)


def uniform_prior(n_nodes: int) -> np.ndarray:
    return np.full(n_nodes, 1.0 / n_nodes)


def synthetic_prior(g: NavGraph, target: int, mode: str, strength: float) -> np.ndarray:
    """Artificial context prior concentrated on (favor) or away from (oppose) a target.

    favor places ``strength`` on the target itself; oppose places it on the
    node farthest from the target (lowest index on ties).  The remaining mass
    spreads uniformly over the other nodes.  strength 0 is the uniform prior.
    """
    if not 0.0 <= strength < 1.0:
        raise ValueError(f"strength must be in [0, 1), got {strength}")
    if mode not in ("favor", "oppose"):
        raise ValueError(f"mode must be 'favor' or 'oppose', got {mode!r}")
    g._check_node(target)
    n = g.n_nodes
    if strength == 0.0:
        return uniform_prior(n)
    if mode == "favor":
        peak = target
    else:
        dists = np.array([action_distance(g, target, t) for t in range(n)])
        peak = int(np.argmax(dists))
    p = np.full(n, (1.0 - strength) / (n - 1))
    p[peak] = strength
    return p


def word_difficulty(index_in_session: int) -> int:
    """Difficulty level 1..5 of a session word; it steps up every two words."""
    if not 0 <= index_in_session <= 9:
        raise ValueError(f"word index must be in 0..9, got {index_in_session}")
    return index_in_session // 2 + 1


def save_model(model: NgramModel, path) -> None:
    """Persist as a flat text table: a JSON header line, then one record per
    context (JSON-encoded context, tab, space-separated counts)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        header = {"order": model.order, "alpha": model.alpha, "labels": list(model.labels)}
        fh.write(json.dumps(header) + "\n")
        for ctx in sorted(model.counts):
            counts = " ".join(str(int(c)) for c in model.counts[ctx])
            fh.write(f"{json.dumps(ctx)}\t{counts}\n")


def load_model(path) -> NgramModel:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        model = NgramModel(order=int(header["order"]), alpha=float(header["alpha"]),
                           labels=tuple(header["labels"]))
        for line in fh:
            if not line.strip():
                continue
            ctx_json, counts = line.rstrip("\n").split("\t")
            model.counts[json.loads(ctx_json)] = np.array(
                [int(c) for c in counts.split(" ")], dtype=np.int64
            )
    return model

"""Synthetic per-trial evidence standing in for pre-recorded calibration data.

Each action class k generates an isotropic Gaussian feature vector with mean
``delta * e_k`` and scale ``sigma``; a trial's evidence is the vector of
class-conditional likelihoods of one such draw (up to a common factor).  The
separation ``delta`` is calibrated by bisection so that the single-draw
argmax accuracy matches a requested target, mirroring a cross-validated
accuracy estimate on real recordings.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAX_TARGET_ACCURACY = 0.995
ACCURACY_TOLERANCE = 0.02
_LIKELIHOOD_FLOOR = 1e-300


@dataclass(frozen=True)
class CalibrationProfile:
    n_classes: int
    delta: float
    sigma: float
    target_accuracy: float
    seed: int


@dataclass(frozen=True)
class TrialEvidence:
    """Class-conditional likelihood values for one observation.

    Entries are strictly positive and finite; only their ratios matter to
    the decoders, so vectors are kept scaled to max 1.
    """

    likelihoods: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.likelihoods)


def likelihoods_from_feature(x: np.ndarray, delta: float, sigma: float) -> np.ndarray:
    """Gaussian class likelihoods of feature x, scaled so the largest is 1."""
    log_l = (delta * x - 0.5 * delta * delta) / (sigma * sigma)
    v = np.exp(log_l - log_l.max())
    return np.maximum(v, _LIKELIHOOD_FLOOR)


def draw_trial_evidence(profile: CalibrationProfile, true_class: int,
                        rng: np.random.Generator) -> TrialEvidence:
    """Draw one feature from ``true_class`` and return all class likelihoods."""
    if not 0 <= true_class < profile.n_classes:
        raise IndexError(
            f"true_class {true_class} outside 0..{profile.n_classes - 1}"
        )
    x = profile.sigma * rng.standard_normal(profile.n_classes)
    x[true_class] += profile.delta
    return TrialEvidence(likelihoods_from_feature(x, profile.delta, profile.sigma))


def _decision_margins(n_samples: int, n_classes: int, rng: np.random.Generator) -> np.ndarray:
    """For draws with the true class cycled uniformly, the margin m such that
    the nearest-mean decision is correct exactly when delta/sigma > m."""
    z = rng.standard_normal((n_samples, n_classes))
    true = np.arange(n_samples) % n_classes
    rows = np.arange(n_samples)
    z_true = z[rows, true].copy()
    z[rows, true] = -np.inf
    return z.max(axis=1) - z_true


def estimate_profile_accuracy(profile: CalibrationProfile, n_samples: int) -> float:
    """Monte Carlo single-draw accuracy: fraction of draws (true class cycled
    uniformly) whose maximum class likelihood belongs to the true class."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([profile.seed, 0xACC]))
    margins = _decision_margins(n_samples, profile.n_classes, rng)
    return float(np.mean(margins < profile.delta / profile.sigma))


def make_profile(target_accuracy: float, n_classes: int, sigma: float = 1.0,
                 seed: int = 0, n_draws: int = 50_000) -> CalibrationProfile:
    """Calibrate the class separation to a target single-draw accuracy.

    Bisection runs against a fixed set of ``n_draws`` Monte Carlo samples, so
    the accuracy curve is monotone in delta and the search is deterministic.
    Targets above 0.995 are clamped with a warning; exact 1.0 is unreachable
    with overlapping Gaussian classes.
    """
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    chance = 1.0 / n_classes
    if target_accuracy <= chance:
        raise ValueError(
            f"target accuracy {target_accuracy} is not above chance ({chance:.3f})"
        )
    if target_accuracy > MAX_TARGET_ACCURACY:
        warnings.warn(
            f"target accuracy {target_accuracy} clamped to {MAX_TARGET_ACCURACY}",
            stacklevel=2,
        )
        target_accuracy = MAX_TARGET_ACCURACY

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xCA1]))
    margins = np.sort(_decision_margins(max(n_draws, 50_000), n_classes, rng))

    def accuracy(delta: float) -> float:
        return float(np.searchsorted(margins, delta / sigma, side="left")) / len(margins)

    lo, hi = 0.0, sigma
    while accuracy(hi) < target_accuracy:
        hi *= 2.0
    while hi - lo > 1e-9 * sigma:
        mid = 0.5 * (lo + hi)
        if accuracy(mid) < target_accuracy:
            lo = mid
        else:
            hi = mid
    delta = hi

    profile = CalibrationProfile(
        n_classes=n_classes,
        delta=float(delta),
        sigma=float(sigma),
        target_accuracy=float(target_accuracy),
        seed=int(seed),
    )
    achieved = estimate_profile_accuracy(profile, max(n_draws, 50_000))
    if abs(achieved - target_accuracy) > ACCURACY_TOLERANCE:
        raise RuntimeError(
            f"calibration failed: achieved {achieved:.4f} for target {target_accuracy:.4f}"
        )
    return profile


def profile_from_scores(true_classes, scores, seed: int = 0) -> CalibrationProfile:
    """Fit a profile to recorded calibration score vectors by moment matching.

    ``scores`` is an (n_draws, n_classes) array of per-class scores and
    ``true_classes`` the matching true class indices.  The fitted separation
    is the average gap between a class's own-score mean and its mean score on
    the other axes; sigma is the pooled within-class standard deviation.
    """
    scores = np.asarray(scores, dtype=float)
    true_classes = np.asarray(true_classes, dtype=int)
    if scores.ndim != 2:
        raise ValueError("scores must be a 2-D array")
    n_draws, n_classes = scores.shape
    if len(true_classes) != n_draws:
        raise ValueError("true_classes length must match scores rows")
    if n_classes < 2:
        raise ValueError("need at least 2 classes")

    gaps = []
    resid = []
    for k in range(n_classes):
        rows = scores[true_classes == k]
        if len(rows) == 0:
            raise ValueError(f"no draws for class {k}")
        mu = rows.mean(axis=0)
        others = np.delete(mu, k)
        gaps.append(mu[k] - others.mean())
        resid.append(rows - mu)
    delta = float(np.mean(gaps))
    sigma = float(np.concatenate(resid).std())
    if sigma <= 0:
        raise ValueError("degenerate scores: zero within-class variance")
    if delta < 0:
        raise ValueError("scores separate classes in the wrong direction")

    profile = CalibrationProfile(
        n_classes=n_classes, delta=delta, sigma=sigma,
        target_accuracy=0.0, seed=int(seed),
    )
    achieved = estimate_profile_accuracy(profile, 100_000)
    return CalibrationProfile(
        n_classes=n_classes, delta=delta, sigma=sigma,
        target_accuracy=achieved, seed=int(seed),
    )


def profile_from_csv(path, seed: int = 0) -> CalibrationProfile:
    """Load calibration draws from a CSV with columns
    ``true_class,score_0,...,score_{k-1}`` and fit a profile."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "true_class":
            raise ValueError(f"{path}: first column must be true_class")
        k = len(header) - 1
        true_classes, rows = [], []
        for rec in reader:
            if not rec:
                continue
            true_classes.append(int(rec[0]))
            rows.append([float(v) for v in rec[1:]])
            if len(rows[-1]) != k:
                raise ValueError(f"{path}: ragged row {len(rows)}")
    return profile_from_scores(true_classes, np.array(rows), seed=seed)

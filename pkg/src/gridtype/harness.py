"""Monte Carlo study over calibration profiles, decoders and selection criteria.

The full grid crosses every requested single-draw accuracy with every
decision model and selection criterion, runs independently seeded sessions in
each cell, and compares both model-based decoders against the likelihood
baseline with Welch t-tests.  Reports are written as a CSV table plus a
structured summary and, optionally, rendered figures.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .epoch import EpochConfig, MODELS
from .evidence import CalibrationProfile, make_profile
from .graph import MODES, NavGraph, n_action_classes
from .lm import NgramModel, word_difficulty
from .session import (
    DEFAULT_WORDS,
    PRIOR_FAVOR,
    PRIOR_LM,
    PRIOR_OPPOSE,
    SessionSpec,
    simulate_session,
)
from .stats import welch_t_test

CSV_HEADER = "profile_accuracy,model,criterion,run,session_time_s,wrong_selections,chars_typed,draws"

DEFAULT_PROFILE_TARGETS = (0.60, 0.70, 0.75, 0.80, 0.85, 0.90, 0.97)
SIGNIFICANCE_ALPHA = 0.001


@dataclass(frozen=True)
class ReportRow:
    profile_accuracy: float
    model: str
    criterion: str
    run: int
    session_time_s: float
    wrong_selections: int
    chars_typed: int
    draws: int


@dataclass
class CellSummary:
    profile_accuracy: float
    model: str
    criterion: str
    runs: int
    mean_time_s: float
    std_time_s: float
    mean_wrong_selections: float


@dataclass
class Comparison:
    profile_accuracy: float
    criterion: str
    model: str
    model_mean_s: float
    baseline_mean_s: float
    t: float
    p: float

    @property
    def significant(self) -> bool:
        return self.p < SIGNIFICANCE_ALPHA


@dataclass
class SimulationReport:
    rows: list[ReportRow] = field(default_factory=list)
    profile_targets: tuple[float, ...] = ()
    models: tuple[str, ...] = ()
    criteria: tuple[str, ...] = ()
    runs: int = 0
    base_seed: int = 0
    word_level_draws: dict[int, float] = field(default_factory=dict)

    def cell_times(self, accuracy: float, model: str, criterion: str) -> np.ndarray:
        return np.array([
            r.session_time_s for r in self.rows
            if r.profile_accuracy == accuracy and r.model == model
            and r.criterion == criterion
        ])

    def cells(self) -> list[CellSummary]:
        out = []
        for acc in self.profile_targets:
            for model in self.models:
                for criterion in self.criteria:
                    sel = [r for r in self.rows
                           if r.profile_accuracy == acc and r.model == model
                           and r.criterion == criterion]
                    if not sel:
                        continue
                    times = np.array([r.session_time_s for r in sel])
                    out.append(CellSummary(
                        profile_accuracy=acc, model=model, criterion=criterion,
                        runs=len(sel),
                        mean_time_s=float(times.mean()),
                        std_time_s=float(times.std(ddof=1)) if len(sel) > 1 else 0.0,
                        mean_wrong_selections=float(
                            np.mean([r.wrong_selections for r in sel])
                        ),
                    ))
        return out

    def comparisons(self) -> list[Comparison]:
        """Welch tests of each model-based decoder against the baseline,
        per profile and criterion.  Empty when runs < 2."""
        out = []
        if self.runs < 2 or "baseline" not in self.models:
            return out
        for acc in self.profile_targets:
            for criterion in self.criteria:
                base = self.cell_times(acc, "baseline", criterion)
                for model in self.models:
                    if model == "baseline":
                        continue
                    times = self.cell_times(acc, model, criterion)
                    if len(times) < 2 or len(base) < 2:
                        continue
                    t, p = welch_t_test(times, base)
                    out.append(Comparison(
                        profile_accuracy=acc, criterion=criterion, model=model,
                        model_mean_s=float(times.mean()),
                        baseline_mean_s=float(base.mean()), t=t, p=p,
                    ))
        return out


def build_profiles(targets, criteria, sigma: float = 1.0,
                   calibration_seed: int = 1234,
                   calibration_draws: int = 50_000) -> dict[tuple[float, str], CalibrationProfile]:
    """Calibrate one profile per (target accuracy, criterion); the criterion
    fixes the number of evidence classes (4 moves, plus select when used)."""
    profiles = {}
    for criterion in criteria:
        k = n_action_classes(criterion)
        for i, target in enumerate(targets):
            seed = int(np.random.SeedSequence(
                [calibration_seed, i, k]).generate_state(1)[0])
            profiles[(target, criterion)] = make_profile(
                target, n_classes=k, sigma=sigma, seed=seed,
                n_draws=calibration_draws,
            )
    return profiles


def _session_seed(base_seed: int, tag: int, p_i: int, m_i: int, c_i: int,
                  run: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([base_seed, tag, p_i, m_i, c_i, run])


def _run_cell(args):
    spec, seeds, acc, model, criterion = args
    rows = []
    word_draws = []
    for run, seed in enumerate(seeds):
        rng = np.random.default_rng(seed)
        res = simulate_session(spec, rng)
        rows.append(ReportRow(
            profile_accuracy=acc, model=model, criterion=criterion, run=run,
            session_time_s=res.total_time_s,
            wrong_selections=res.wrong_selections,
            chars_typed=res.chars_typed, draws=res.draws,
        ))
        word_draws.append(res.word_draws)
    return rows, word_draws


def run_monte_carlo(
    profiles=DEFAULT_PROFILE_TARGETS,
    models=MODELS,
    criteria=MODES,
    runs: int = 30,
    base_seed: int = 0,
    *,
    graph: NavGraph,
    lm: NgramModel | None,
    epoch: EpochConfig | None = None,
    words=DEFAULT_WORDS,
    prior_mode: str = PRIOR_LM,
    prior_strength: float = 0.5,
    sigma: float = 1.0,
    calibration_seed: int = 1234,
    calibration_draws: int = 50_000,
    prebuilt_profiles: dict[tuple[float, str], CalibrationProfile] | None = None,
    jobs: int = 1,
    seed_tag: int = 0,
) -> SimulationReport:
    """Run the full (profile x model x criterion x run) session grid.

    Every cell draws from its own seed stream derived from ``base_seed`` and
    the cell's grid indices, so reports are reproducible bit for bit and
    independent of ``jobs``.
    """
    profiles = tuple(profiles)
    models = tuple(models)
    criteria = tuple(criteria)
    if not profiles or not models or not criteria or runs < 1:
        raise ValueError("empty simulation grid")
    epoch = epoch or EpochConfig()
    calibrated = prebuilt_profiles or build_profiles(
        profiles, criteria, sigma=sigma, calibration_seed=calibration_seed,
        calibration_draws=calibration_draws,
    )

    tasks = []
    for p_i, acc in enumerate(profiles):
        for m_i, model in enumerate(models):
            for c_i, criterion in enumerate(criteria):
                spec = SessionSpec(
                    graph=graph,
                    profile=calibrated[(acc, criterion)],
                    config=replace(epoch, model=model, criterion=criterion),
                    words=tuple(words),
                    lm=lm,
                    prior_mode=prior_mode,
                    prior_strength=prior_strength,
                )
                seeds = [_session_seed(base_seed, seed_tag, p_i, m_i, c_i, run)
                         for run in range(runs)]
                tasks.append((spec, seeds, acc, model, criterion))

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, tasks))
    else:
        results = [_run_cell(t) for t in tasks]

    report = SimulationReport(
        profile_targets=profiles, models=models, criteria=criteria,
        runs=runs, base_seed=base_seed,
    )
    level_draws: dict[int, list[int]] = {}
    for rows, word_draws in results:
        report.rows.extend(rows)
        for per_word in word_draws:
            if len(per_word) == len(DEFAULT_WORDS):
                for wi, d in enumerate(per_word):
                    level_draws.setdefault(word_difficulty(wi), []).append(d)
    report.word_level_draws = {
        lvl: float(np.mean(v)) for lvl, v in sorted(level_draws.items())
    }
    return report


def favor_oppose_experiment(
    words=DEFAULT_WORDS[:2],
    strength: float = 0.5,
    profiles=DEFAULT_PROFILE_TARGETS,
    models=("joint", "marginal"),
    runs: int = 30,
    base_seed: int = 0,
    *,
    graph: NavGraph,
    criteria=("psc",),
    epoch: EpochConfig | None = None,
    sigma: float = 1.0,
    calibration_seed: int = 1234,
    calibration_draws: int = 50_000,
    jobs: int = 1,
) -> dict[str, SimulationReport]:
    """Two-word sessions with artificial context aimed at or away from each
    target, probing how strongly each decoder leans on the prior."""
    words = tuple(words)
    if len(words) != 2:
        raise ValueError("the context experiment types exactly two words")
    calibrated = build_profiles(profiles, criteria, sigma=sigma,
                                calibration_seed=calibration_seed,
                                calibration_draws=calibration_draws)
    out = {}
    for tag, mode in ((1, PRIOR_FAVOR), (2, PRIOR_OPPOSE)):
        out[mode] = run_monte_carlo(
            profiles, models, criteria, runs, base_seed,
            graph=graph, lm=None, epoch=epoch, words=words,
            prior_mode=mode, prior_strength=strength,
            prebuilt_profiles=calibrated, jobs=jobs, seed_tag=tag,
        )
    return out


def write_report(report: SimulationReport, csv_path, summary_path=None) -> None:
    """Write the row table as CSV (header pinned) and a text summary beside it."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for r in report.rows:
            writer.writerow([
                r.profile_accuracy, r.model, r.criterion, r.run,
                r.session_time_s, r.wrong_selections, r.chars_typed, r.draws,
            ])
    if summary_path is None:
        summary_path = csv_path.with_suffix(".summary.txt")
    Path(summary_path).write_text(format_summary(report), encoding="utf-8")


def read_report(csv_path) -> list[ReportRow]:
    rows = []
    with Path(csv_path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != CSV_HEADER:
            raise ValueError(f"unexpected report header: {header}")
        for rec in reader:
            rows.append(ReportRow(
                profile_accuracy=float(rec[0]), model=rec[1], criterion=rec[2],
                run=int(rec[3]), session_time_s=float(rec[4]),
                wrong_selections=int(rec[5]), chars_typed=int(rec[6]),
                draws=int(rec[7]),
            ))
    return rows


def format_summary(report: SimulationReport) -> str:
    """Structured plain-text summary: per-cell statistics and Welch tests."""
    buf = io.StringIO()
    buf.write("cells:\n")
    for c in report.cells():
        buf.write(
            f"  - profile_accuracy: {c.profile_accuracy}\n"
            f"    model: {c.model}\n"
            f"    criterion: {c.criterion}\n"
            f"    runs: {c.runs}\n"
            f"    mean_session_time_s: {c.mean_time_s:.3f}\n"
            f"    std_session_time_s: {c.std_time_s:.3f}\n"
            f"    mean_wrong_selections: {c.mean_wrong_selections:.3f}\n"
        )
    comparisons = report.comparisons()
    buf.write("comparisons_vs_baseline:\n")
    if not comparisons:
        buf.write("  []\n")
    for cmp_ in comparisons:
        buf.write(
            f"  - profile_accuracy: {cmp_.profile_accuracy}\n"
            f"    criterion: {cmp_.criterion}\n"
            f"    model: {cmp_.model}\n"
            f"    model_mean_s: {cmp_.model_mean_s:.3f}\n"
            f"    baseline_mean_s: {cmp_.baseline_mean_s:.3f}\n"
            f"    t: {cmp_.t:.4f}\n"
            f"    p: {cmp_.p:.6g}\n"
            f"    significant_at_{SIGNIFICANCE_ALPHA}: {str(cmp_.significant).lower()}\n"
        )
    if report.word_level_draws:
        buf.write("mean_draws_by_word_difficulty:\n")
        for lvl, mean_draws in report.word_level_draws.items():
            buf.write(f"  level_{lvl}: {mean_draws:.2f}\n")
    return buf.getvalue()

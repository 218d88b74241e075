"""Command-line entry point.

Subcommands:

* ``train-lm``   -- fit the character n-gram model from a corpus file.
* ``simulate``   -- run the Monte Carlo session grid and write reports.
* ``experiment`` -- run the favor/oppose context-prior experiment.
* ``serve``      -- start the live typing session service.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .harness import favor_oppose_experiment, run_monte_carlo, write_report

log = logging.getLogger("gridtype")

CONFIG_ENV_VAR = "GRIDTYPE_CONFIG"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridtype",
        description="Bayesian intent decoding and typing simulation on grid keyboards",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_lm = sub.add_parser("train-lm", help="train the character n-gram model")
    p_lm.add_argument("--corpus", required=True, help="plain-text training corpus")
    p_lm.add_argument("--order", type=int, default=6)
    p_lm.add_argument("--alpha", type=float, default=0.1)
    p_lm.add_argument("--out", required=True, help="model file to write")

    p_sim = sub.add_parser("simulate", help="run the Monte Carlo session grid")
    _config_flags(p_sim)
    p_sim.add_argument("--runs", type=int, help="runs per grid cell (overrides config)")
    p_sim.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p_exp = sub.add_parser("experiment", help="run the favor/oppose context experiment")
    _config_flags(p_exp)
    p_exp.add_argument("--runs", type=int, help="runs per grid cell (overrides config)")
    p_exp.add_argument("--strength", type=float, help="prior strength (overrides config)")
    p_exp.add_argument("--jobs", type=int, default=1, help="parallel workers")

    p_srv = sub.add_parser("serve", help="serve live typing sessions over HTTP/WebSocket")
    p_srv.add_argument("--config", help="run configuration file (optional)")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--ui-dir", help="directory with the built web UI to serve at /")

    return parser


def _config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"run configuration file (or ${CONFIG_ENV_VAR})")
    p.add_argument("--seed", type=int, help="base seed (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def _load(args: argparse.Namespace) -> RunConfig:
    path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        raise ConfigError(
            f"no configuration: pass --config or set ${CONFIG_ENV_VAR}"
        )
    cfg = load_config(path)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.output.dir = args.out
    if getattr(args, "runs", None) is not None:
        if args.runs < 1:
            raise ConfigError("--runs must be >= 1")
        cfg.grid.runs = args.runs
    if getattr(args, "no_figures", False):
        cfg.output.figures = False
    if getattr(args, "strength", None) is not None:
        if not 0.0 <= args.strength < 1.0:
            raise ConfigError("--strength must be in [0, 1)")
        cfg.experiment.strength = args.strength
    return cfg


def cmd_train_lm(args: argparse.Namespace) -> int:
    from .lm import save_model, train_ngram_file

    if args.order < 1:
        raise ConfigError("--order must be >= 1")
    if args.alpha <= 0:
        raise ConfigError("--alpha must be positive")
    if not Path(args.corpus).is_file():
        raise ConfigError(f"corpus file not found: {args.corpus}")
    model = train_ngram_file(args.corpus, order=args.order, alpha=args.alpha)
    save_model(model, args.out)
    log.info("trained order-%d model on %s -> %s", args.order, args.corpus, args.out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load(args)
    graph = cfg.graph.build()
    lm = cfg.lm.build(graph.labels)
    outdir = Path(cfg.output.dir)
    report = run_monte_carlo(
        cfg.profiles.targets, cfg.grid.models, cfg.grid.criteria,
        cfg.grid.runs, cfg.seed,
        graph=graph, lm=lm, epoch=cfg.epoch, words=cfg.session.words,
        sigma=cfg.profiles.sigma,
        calibration_seed=cfg.profiles.calibration_seed,
        calibration_draws=cfg.profiles.calibration_draws,
        jobs=args.jobs,
    )
    write_report(report, outdir / "results.csv", outdir / "summary.txt")
    if cfg.output.figures:
        from .figures import render_report_figures

        render_report_figures(report, outdir)
    log.info("wrote %d rows to %s", len(report.rows), outdir / "results.csv")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = _load(args)
    graph = cfg.graph.build()
    outdir = Path(cfg.output.dir)
    reports = favor_oppose_experiment(
        cfg.experiment.words, cfg.experiment.strength, cfg.profiles.targets,
        cfg.experiment.models, cfg.grid.runs, cfg.seed,
        graph=graph, criteria=cfg.experiment.criteria, epoch=cfg.epoch,
        sigma=cfg.profiles.sigma,
        calibration_seed=cfg.profiles.calibration_seed,
        calibration_draws=cfg.profiles.calibration_draws,
        jobs=args.jobs,
    )
    for mode, report in reports.items():
        write_report(report, outdir / f"{mode}.csv", outdir / f"{mode}.summary.txt")
    if cfg.output.figures:
        from .figures import render_context_figure

        render_context_figure(reports, outdir)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    cfg = load_config(args.config) if args.config else RunConfig()
    app = create_app(cfg, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "train-lm": cmd_train_lm,
    "simulate": cmd_simulate,
    "experiment": cmd_experiment,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps to exit codes
        log.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()

"""
Kommandozeile
metricsens estimate | converge | map | validate-config
"""

import argparse
import sys
from collections.abc import Sequence

from loguru import logger

from metricsens import __version__
from metricsens.cli.run_config import RunConfig, load_run_config
from metricsens.cli.runner import build_model, convergence_study, resolve_subsets, run, run_maps
from metricsens.config import settings
from metricsens.errors import ConfigurationError, MetricSensError

EXIT_OK = 0
EXIT_ERROR = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metricsens", description="Sensitivity indices on metric-space outputs")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="run config (JSON) or an emitted report.json")
    common.add_argument("--seed", type=int, default=None, help="replaces the seed list of the config")
    common.add_argument("--workers", type=int, default=None, help="worker threads")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default="csv", help="table format")
    common.add_argument("--log-level", default=None, help="loguru level (default from settings)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="estimate indices with intervals")
    sub.add_parser("converge", parents=[common], help="convergence study over a budget grid")
    sub.add_parser("map", parents=[common], help="per-location sensitivity maps for field outputs")
    sub.add_parser("validate-config", parents=[common], help="validate a run config and exit")
    return parser


def _configure_logging(level: str | None) -> None:
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.log_level).upper())


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config)
    if args.seed is not None and args.seed < 0:
        raise ConfigurationError(f"--seed must be >= 0, got {args.seed}")
    return config.with_overrides(seed=args.seed, workers=args.workers, out_dir=args.out)


def _validate(config: RunConfig) -> None:
    model = build_model(config)
    subsets = resolve_subsets(config.subsets, model)
    print(
        f"OK: model={model.name} p={model.p} family={config.family.value} "
        f"subsets={[u.label(model.input_model) for u in subsets]} "
        f"estimators={[e.value for e in config.estimators]} hash={config.config_hash()[:12]}"
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    try:
        config = _load(args)
        if args.command == "validate-config":
            _validate(config)
        elif args.command == "estimate":
            report = run(config, args.format)
            errors = sum(1 for row in report.rows if row.error)
            print(f"{len(report.rows)} rows ({errors} with errors), {report.calls} model calls -> {config.out_dir}")
        elif args.command == "converge":
            frame = convergence_study(config, args.format)
            print(f"{len(frame)} convergence rows -> {config.out_dir}")
        else:
            paths = run_maps(config)
            print(f"{len(paths)} maps -> {config.out_dir}")
    except MetricSensError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

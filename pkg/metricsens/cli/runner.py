"""
Experiment-Runner
Führt eine RunConfig aus: Schätzungen je (u, Schätzer), Konvergenzstudien, Karten
"""

import json
import time
from pathlib import Path
from typing import Any

import pandas as pd
from loguru import logger
from pydantic import BaseModel, Field

from metricsens import __version__
from metricsens.baselines.pick_freeze import EstimatorKind, estimate_baseline
from metricsens.cli.run_config import BuiltinModelSpec, RunConfig
from metricsens.errors import BootstrapError, ConfigurationError, DegenerateVarianceError, IntervalError
from metricsens.inference.intervals import attach_interval, confidence_interval
from metricsens.metricspace.families import TestFamily
from metricsens.models.analytic import AnalyticModel
from metricsens.models.external import ExternalCommandModel
from metricsens.models.lognormal import lognormal_model
from metricsens.models.maps import ubiquitous_maps
from metricsens.models.plume import plume_map_model, plume_model
from metricsens.sampling.design import PairedSample, SubsetU, pick_freeze, pick_freeze_shared
from metricsens.ustat_engine.estimator import IndexEstimate, estimate_gms_index
from metricsens.ustat_engine.ustatistics import UStatConfig

# feste Spalten, danach die Diagnose-Spalten out_of_range und error
CSV_COLUMNS = [
    "subset",
    "family",
    "estimator",
    "N",
    "value",
    "sigma",
    "ci_lo",
    "ci_hi",
    "calls",
    "seed",
    "out_of_range",
    "error",
]
CONVERGENCE_COLUMNS = ["n", "estimator", "u", "estimate", "sigma", "N", "calls", "replicate", "seed", "error"]
_FLOAT_FORMAT = "%.17g"


class ResultRow(BaseModel):
    subset: str
    family: str
    estimator: str
    N: int
    value: float | None = None
    sigma: float | None = None
    ci_lo: float | None = None
    ci_hi: float | None = None
    calls: int
    seed: int
    out_of_range: bool = False
    error: str = ""
    ci_method: str | None = None
    reference: float | None = None


class RunReport(BaseModel):
    version: str = __version__
    schema_version: int
    config: dict[str, Any]
    config_hash: str
    seeds: list[int]
    rows: list[ResultRow] = Field(default_factory=list)
    calls: int = 0
    timing: dict[str, float] = Field(default_factory=dict)
    files: list[str] = Field(default_factory=list)


# ==================== Modell & Design ====================


def build_model(config: RunConfig) -> AnalyticModel:
    spec = config.model
    grid = spec.grid.build() if spec.grid is not None else None
    if isinstance(spec, BuiltinModelSpec):
        if spec.name == "lognormal":
            return lognormal_model()
        if spec.name == "plume":
            return plume_model(spec.height, grid)
        return plume_map_model(grid)

    external = ExternalCommandModel(spec.command, tuple(spec.output_shape), grid, spec.timeout)
    dists = [item.distribution.build() for item in spec.inputs]
    names = [item.name for item in spec.inputs]
    return AnalyticModel(external.input_model(spec.name, dists, names))


def resolve_subsets(raw: list[list[int | str]] | None, model: AnalyticModel) -> list[SubsetU]:
    if raw is None:
        return [SubsetU((i,)) for i in range(1, model.p + 1)]
    return [SubsetU.parse(item, model.input_model) for item in raw]


def sample_size(config: RunConfig, subsets: int, budget: int | None = None) -> int:
    """
    N aus dem Gesamtbudget n an Modellaufrufen.

    Mit gemeinsamem Design N = n / (|subsets| + 1), sonst kostet jede
    Teilmenge 2N und N = n / (2 |subsets|).
    """
    budget = budget if budget is not None else config.budget
    if budget is None:
        if config.n is None:
            raise ConfigurationError("Neither 'n' nor 'budget' set for this run")
        return config.n
    return budget // (subsets + 1) if config.shared_design else budget // (2 * subsets)


def _family(config: RunConfig, model: AnalyticModel) -> TestFamily:
    space = model.input_model.space
    if space is None:
        raise ConfigurationError(f"Model {model.name!r} declares no output space")
    return TestFamily(config.family, space)


def _design(
    config: RunConfig, model: AnalyticModel, subsets: list[SubsetU], n: int, seed: int, family: TestFamily
) -> tuple[dict[SubsetU, PairedSample], int]:
    input_model = model.input_model
    if config.shared_design:
        evaluator = input_model.evaluator(config.workers)
        samples = pick_freeze_shared(input_model, subsets, n, seed, evaluator, family.m)
        return samples, evaluator.calls

    samples, calls = {}, 0
    for u in subsets:
        # frischer Evaluator: keine Wiederverwendung von f(X) zwischen Teilmengen
        evaluator = input_model.evaluator(config.workers)
        samples[u] = pick_freeze(input_model, u, n, seed, evaluator, family.m)
        calls += evaluator.calls
    return samples, calls


# ==================== Schätzung ====================


def _estimate(
    config: RunConfig, sample: PairedSample, family: TestFamily, kind: EstimatorKind, seed: int
) -> IndexEstimate:
    level = config.interval.level
    if kind is EstimatorKind.GMS:
        ustat = UStatConfig(
            mode=config.ustat.mode,
            tuple_budget=config.ustat.tuple_budget,
            seed=seed,
            center=config.ustat.center,
            workers=config.workers,
        )
        estimate = estimate_gms_index(sample, family, ustat)
        return attach_interval(
            estimate,
            sample,
            family,
            ustat,
            config.interval.method,
            level,
            config.interval.projection_tuples,
            config.interval.bootstrap_replicates,
            seed,
        )
    estimate = estimate_baseline(sample, kind)
    sigma = 0.0 if estimate.sigma is None else estimate.sigma
    return estimate.with_interval(sigma, confidence_interval(estimate, sigma, level), "delta", level)


def estimate_rows(
    config: RunConfig, model: AnalyticModel, subsets: list[SubsetU], n: int, seed: int
) -> tuple[list[ResultRow], int]:
    """Alle (u, Schätzer)-Zeilen für einen Seed; degenerierte Zeilen tragen einen Fehler"""
    family = _family(config, model)
    samples, calls = _design(config, model, subsets, n, seed, family)
    rows = []
    for u, sample in samples.items():
        label = u.label(model.input_model)
        for kind in config.estimators:
            base = {
                "subset": label,
                "family": family.kind.value,
                "estimator": kind.value,
                "N": n,
                "calls": sample.calls,
                "seed": seed,
                "reference": model.reference(u, family.kind),
            }
            try:
                estimate = _estimate(config, sample, family, kind, seed)
            except (DegenerateVarianceError, BootstrapError, IntervalError) as e:
                logger.warning(f"u={label} {kind.value}: {e}")
                rows.append(ResultRow(**base, error=str(e)))
                continue
            lo, hi = estimate.ci if estimate.ci is not None else (None, None)
            rows.append(
                ResultRow(
                    **base,
                    value=estimate.value,
                    sigma=estimate.sigma,
                    ci_lo=lo,
                    ci_hi=hi,
                    ci_method=estimate.ci_method,
                    out_of_range=estimate.out_of_range,
                )
            )
    return rows, calls


# ==================== Ausgabe ====================


def rows_frame(rows: list[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=list(ResultRow.model_fields))


def write_table(frame: pd.DataFrame, path: Path, fmt: str) -> Path:
    if fmt == "json":
        path = path.with_suffix(".json")
        path.write_text(frame.to_json(orient="records", double_precision=15, indent=2), encoding="utf-8")
    elif fmt == "csv":
        path = path.with_suffix(".csv")
        frame.to_csv(path, index=False, float_format=_FLOAT_FORMAT)
    else:
        raise ConfigurationError(f"Unknown output format {fmt!r}, use csv or json")
    logger.info(f"Wrote {path}")
    return path


def _new_report(config: RunConfig) -> RunReport:
    return RunReport(
        schema_version=config.schema_version,
        config=config.model_dump(mode="json"),
        config_hash=config.config_hash(),
        seeds=list(config.seeds),
    )


def _write_report(report: RunReport, out_dir: Path) -> Path:
    path = out_dir / "report.json"
    report.files.append(str(path))
    path.write_text(json.dumps(report.model_dump(mode="json"), indent=2), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def run(config: RunConfig, fmt: str = "csv") -> RunReport:
    """Schätzungen für alle (u, Schätzer, Seed), Tabelle plus JSON-Report"""
    started = time.perf_counter()
    model = build_model(config)
    subsets = resolve_subsets(config.subsets, model)
    n = sample_size(config, len(subsets))
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    report = _new_report(config)
    for seed in config.seeds:
        rows, calls = estimate_rows(config, model, subsets, n, seed)
        report.rows.extend(rows)
        report.calls += calls
        logger.info(f"Seed {seed}: {len(rows)} rows, {calls} model calls")

    frame = rows_frame(report.rows)[CSV_COLUMNS]
    report.files.append(str(write_table(frame, out_dir / "results", fmt)))
    report.timing["total_seconds"] = time.perf_counter() - started
    _write_report(report, out_dir)
    return report


def convergence_study(config: RunConfig, fmt: str = "csv") -> pd.DataFrame:
    """Eine Zeile je (Budget, Schätzer, u, Replikat) über ein log-verteiltes Budgetgitter"""
    if config.convergence is None:
        raise ConfigurationError("Run config has no 'convergence' section")
    model = build_model(config)
    subsets = resolve_subsets(config.subsets, model)
    family_m = _family(config, model).m
    records = []
    for budget in config.convergence.grid():
        n = sample_size(config, len(subsets), budget)
        if n < family_m + 2:
            logger.warning(f"Budget {budget} gives N={n} < {family_m + 2}, skipped")
            continue
        for replicate in range(config.convergence.replicates):
            seed = config.seeds[0] + replicate
            rows, calls = estimate_rows(config, model, subsets, n, seed)
            records.extend(
                {
                    "n": budget,
                    "estimator": row.estimator,
                    "u": row.subset,
                    "estimate": row.value,
                    "sigma": row.sigma,
                    "N": row.N,
                    "calls": calls,
                    "replicate": replicate,
                    "seed": seed,
                    "error": row.error,
                }
                for row in rows
            )
        logger.info(f"Convergence budget n={budget} (N={n}) done")

    frame = pd.DataFrame(records, columns=CONVERGENCE_COLUMNS)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(frame, out_dir / "convergence", fmt)
    return frame


def run_maps(config: RunConfig) -> list[Path]:
    """Sensitivitätskarten je Teilmenge aus einem gemeinsamen Design, eine CSV je Karte"""
    if config.map is None:
        raise ConfigurationError("Run config has no 'map' section")
    model = build_model(config)
    subsets = resolve_subsets(config.map.subsets, model)
    maps = ubiquitous_maps(
        model, subsets, config.map.n, config.map.estimator, config.seeds[0], workers=config.workers
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for u, sensitivity_map in maps.items():
        names = [model.input_model.names[i - 1] for i in u.indices] if model.input_model.names else []
        path = sensitivity_map.to_csv(out_dir / f"map_{'_'.join(names)}.csv")
        logger.info(f"Wrote {path} ({sensitivity_map.missing} missing nodes)")
        paths.append(path)
    return paths

"""
Ubiquitäre Sensitivitätsanalyse
Ein Index je Gitterknoten aus einem einzigen Pick-Freeze-Design über Feldausgaben
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from loguru import logger

from metricsens.baselines.pick_freeze import EstimatorKind, estimate_baseline
from metricsens.errors import DegenerateVarianceError, ShapeError
from metricsens.metricspace.families import FamilyKind, TestFamily
from metricsens.metricspace.spaces import Grid, GridFieldSpace, ScalarSpace, write_field_csv
from metricsens.models.analytic import AnalyticModel
from metricsens.parallel import chunk_ranges, map_chunks
from metricsens.sampling.design import InputModel, PairedSample, SubsetU, pick_freeze, pick_freeze_shared
from metricsens.ustat_engine.estimator import centered_geometry, estimate_from_geometry
from metricsens.ustat_engine.ustatistics import UStatConfig, UStatMode

_NODE_FAMILY = TestFamily(FamilyKind.SOBOL_VALUE, ScalarSpace())
_NODE_CONFIG = UStatConfig(mode=UStatMode.FACTORIZED, workers=1)


@dataclass(frozen=True)
class SensitivityMap:
    grid: Grid
    values: np.ndarray  # nx x ny, NaN für degenerierte Knoten
    subset: str
    estimator: str
    n: int

    @property
    def missing(self) -> int:
        return int(np.isnan(self.values).sum())

    def to_csv(self, path: str | Path) -> Path:
        return write_field_csv(path, self.grid, self.values)


def _input_model(model: AnalyticModel | InputModel) -> InputModel:
    return model.input_model if isinstance(model, AnalyticModel) else model


def _model_grid(model: InputModel, grid: Grid | None) -> Grid:
    if not isinstance(model.space, GridFieldSpace):
        raise ShapeError(f"Model {model.name!r} has no grid-field output")
    if grid is not None and grid != model.space.grid:
        raise ShapeError(f"Requested grid {grid} differs from the model grid {model.space.grid}")
    return model.space.grid


def node_index(sample: PairedSample, estimator: EstimatorKind) -> float:
    """Index einer skalaren Knoten-Stichprobe, NaN bei konstanter Ausgabe"""
    try:
        if estimator is EstimatorKind.GMS:
            geom, shift = centered_geometry(sample, _NODE_FAMILY, True)
            return estimate_from_geometry(geom, _NODE_FAMILY, _NODE_CONFIG, shift=shift).value
        return estimate_baseline(sample, estimator).value
    except DegenerateVarianceError:
        return math.nan


def _map_from_sample(
    sample: PairedSample, grid: Grid, estimator: EstimatorKind, label: str, workers: int | None
) -> SensitivityMap:
    n = sample.n
    z = sample.z.reshape(n, -1)
    zu = sample.zu.reshape(n, -1)

    def run_chunk(bounds: tuple[int, int]) -> list[float]:
        return [
            node_index(PairedSample(z[:, k], zu[:, k], sample.u, sample.seed, space=ScalarSpace()), estimator)
            for k in range(*bounds)
        ]

    parts = map_chunks(run_chunk, chunk_ranges(z.shape[1]), workers)
    values = np.array([v for part in parts for v in part]).reshape(grid.nx, grid.ny)
    result = SensitivityMap(grid, values, label, estimator.value, n)
    if result.missing:
        logger.warning(f"Map u={label}: {result.missing} degenerate nodes emitted as missing")
    return result


def ubiquitous_map(
    model: AnalyticModel | InputModel,
    u: SubsetU,
    n: int,
    estimator: EstimatorKind | str = EstimatorKind.GMS,
    seed: int = 0,
    grid: Grid | None = None,
    workers: int | None = None,
) -> SensitivityMap:
    """Sobol-Index je Knoten, 2N Feldauswertungen insgesamt"""
    input_model = _input_model(model)
    grid = _model_grid(input_model, grid)
    kind = EstimatorKind(estimator)
    sample = pick_freeze(input_model, u, n, seed, input_model.evaluator(workers))
    logger.info(f"Computing {grid.nx}x{grid.ny} map for u={u.label(input_model)} with {kind.value}")
    return _map_from_sample(sample, grid, kind, u.label(input_model), workers)


def ubiquitous_maps(
    model: AnalyticModel | InputModel,
    subsets: Sequence[SubsetU],
    n: int,
    estimator: EstimatorKind | str = EstimatorKind.GMS,
    seed: int = 0,
    grid: Grid | None = None,
    workers: int | None = None,
) -> dict[SubsetU, SensitivityMap]:
    """Alle Karten auf einem gemeinsamen Design (ein f(X) für alle Teilmengen)"""
    input_model = _input_model(model)
    grid = _model_grid(input_model, grid)
    kind = EstimatorKind(estimator)
    samples = pick_freeze_shared(input_model, subsets, n, seed, input_model.evaluator(workers))
    return {
        u: _map_from_sample(sample, grid, kind, u.label(input_model), workers)
        for u, sample in samples.items()
    }

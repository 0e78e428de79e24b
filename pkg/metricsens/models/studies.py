"""
Tabellen-Studie zur Gauß-Fahne
Ball-Indizes erster Ordnung für (Q, K, u) über Quellhöhen H und Stichprobenumfänge N
"""

from collections.abc import Sequence

import pandas as pd
from loguru import logger

from metricsens.metricspace.families import FamilyKind, TestFamily
from metricsens.metricspace.spaces import Grid
from metricsens.models.plume import plume_model
from metricsens.sampling.design import SubsetU, pick_freeze
from metricsens.ustat_engine.estimator import estimate_gms_index
from metricsens.ustat_engine.ustatistics import UStatConfig, UStatMode

TABLE_HEIGHTS = (1.0, 2.0, 10.0, 20.0)
TABLE_SIZES = (1000, 2000, 5000)


def plume_table_study(
    heights: Sequence[float] = TABLE_HEIGHTS,
    sizes: Sequence[int] = TABLE_SIZES,
    family: FamilyKind = FamilyKind.METRIC_BALL,
    tuple_budget: int = 1_000_000,
    seed: int = 0,
    grid: Grid | None = None,
    workers: int | None = None,
) -> pd.DataFrame:
    """Eine Zeile je (H, N, Eingang) mit dem geschätzten Index"""
    rows = []
    for height in heights:
        analytic = plume_model(height, grid)
        model = analytic.input_model
        test_family = TestFamily(family, model.space)
        evaluator = model.evaluator(workers)
        config = UStatConfig(mode=UStatMode.INCOMPLETE, tuple_budget=tuple_budget, seed=seed, workers=workers)
        for n in sizes:
            for i, name in enumerate(model.names or [], start=1):
                sample = pick_freeze(model, SubsetU((i,)), n, seed, evaluator, test_family.m)
                estimate = estimate_gms_index(sample, test_family, config)
                rows.append({"H": height, "N": n, "input": name, "value": estimate.value})
            evaluator.reset()
        logger.info(f"Plume table: H={height:g} done for N in {list(sizes)}")
    return pd.DataFrame(rows, columns=["H", "N", "input", "value"])

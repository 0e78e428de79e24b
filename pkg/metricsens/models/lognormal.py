"""
Lognormales Spielzeugmodell Z = exp(X1 + 2 X2) mit standardnormalen Eingängen
"""

import math

import numpy as np

from metricsens.metricspace.families import FamilyKind
from metricsens.metricspace.spaces import ScalarSpace
from metricsens.models.analytic import AnalyticModel
from metricsens.sampling.design import InputModel
from metricsens.sampling.distributions import StandardNormal


def lognormal_toy(x1: float | np.ndarray, x2: float | np.ndarray) -> float | np.ndarray:
    return np.exp(x1 + 2.0 * x2)


def lognormal_references() -> dict[str, float]:
    """Geschlossene Formen der Sobol- und Cramér-von-Mises-Indizes"""
    total = math.exp(4.0) - 1.0
    return {
        "sobol_1": (1.0 - math.exp(-1.0)) / total,
        "sobol_2": (math.exp(3.0) - math.exp(-3.0)) / total,
        "cvm_1": 6.0 / math.pi * math.atan(2.0) - 2.0,
        "cvm_2": 6.0 / math.pi * math.atan(math.sqrt(19.0)) - 2.0,
    }


def _evaluate(x: np.ndarray) -> np.ndarray:
    return lognormal_toy(x[:, 0], x[:, 1])


def lognormal_model() -> AnalyticModel:
    refs = lognormal_references()
    model = InputModel(
        name="lognormal",
        dists=[StandardNormal(), StandardNormal()],
        func=_evaluate,
        names=["X1", "X2"],
        vectorized=True,
        space=ScalarSpace(),
    )
    return AnalyticModel(
        model,
        {
            ((1,), FamilyKind.SOBOL_VALUE): refs["sobol_1"],
            ((2,), FamilyKind.SOBOL_VALUE): refs["sobol_2"],
            ((1,), FamilyKind.HALF_SPACE_CVM): refs["cvm_1"],
            ((2,), FamilyKind.HALF_SPACE_CVM): refs["cvm_2"],
        },
    )

"""
Pytest configuration for metricsens tests
Adds project root to Python path and provides shared samples and models
"""

import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from metricsens.metricspace.spaces import ScalarSpace, VectorSpace  # noqa: E402
from metricsens.models.lognormal import lognormal_model  # noqa: E402
from metricsens.sampling.design import InputModel, PairedSample, SubsetU  # noqa: E402
from metricsens.sampling.distributions import Uniform  # noqa: E402


def make_sample(z, zu, u=(1,), space=None) -> PairedSample:
    """Gepaarte Stichprobe aus festen Spalten"""
    z = np.asarray(z, dtype=float)
    zu = np.asarray(zu, dtype=float)
    return PairedSample(z, zu, SubsetU(tuple(u)), seed=0, space=space)


@pytest.fixture
def toy_model():
    """Lognormales Spielzeugmodell als InputModel"""
    return lognormal_model().input_model


@pytest.fixture
def scalar_sample():
    """Kleine skalare Stichprobe mit Bindungen"""
    rng = np.random.default_rng(11)
    z = np.round(rng.normal(size=7), 1)
    zu = np.round(0.6 * z + 0.8 * rng.normal(size=7), 1)
    zu[2] = z[2]
    return make_sample(z, zu, space=ScalarSpace())


@pytest.fixture
def vector_sample():
    """Kleine Stichprobe im R^2"""
    rng = np.random.default_rng(5)
    z = rng.normal(size=(7, 2))
    zu = 0.5 * z + rng.normal(size=(7, 2))
    return make_sample(z, zu, space=VectorSpace(2))


@pytest.fixture
def uniform_model():
    """Drei U[0, 10]-Eingänge, f = Summe mit Gewichten"""

    def f(x: np.ndarray) -> float:
        return float(x[0] + 2.0 * x[1] + 0.5 * x[2])

    return InputModel(name="linear", dists=[Uniform(0.0, 10.0) for _ in range(3)], func=f, space=ScalarSpace())


@pytest.fixture
def sample_factory():
    return make_sample


# ==================== Brute-Force-Orakel ====================


def _test_function(kind: str):
    """T_a(x) in reinem Python, unabhängig von der Engine"""

    def dist(x, y):
        return float(np.sqrt(np.sum((np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) ** 2)))

    if kind == "sobol_value":
        return lambda a, x: float(x)
    if kind == "sobol_vector":
        return lambda a, x: np.asarray(x, dtype=float)
    if kind == "halfspace_cvm":
        return lambda a, x: float(np.all(np.asarray(x) <= np.asarray(a[0])))
    if kind == "metric_ball":
        return lambda a, x: float(dist(x, a[0]) <= dist(a[0], a[1]))
    if kind == "midpoint_ball":
        return lambda a, x: float(
            dist(x, (np.asarray(a[0]) + np.asarray(a[1])) / 2.0) <= dist(a[0], a[1]) / 2.0
        )
    return lambda a, x: float(max(dist(x, a[0]), dist(x, a[1])) <= dist(a[0], a[1]))


def brute_force_ustat(j: int, z, zu, kind: str, m: int) -> float:
    """Mittel der symmetrisierten Kernel über alle aufsteigenden Index-Tupel"""
    t = _test_function(kind)
    order = m + (1 if j in (1, 3) else 2)
    averages = []
    for combo in itertools.combinations(range(len(z)), order):
        values = []
        for perm in itertools.permutations(combo):
            a = [z[perm[r]] for r in range(m)]
            k, nxt = perm[m], perm[m + 1] if order > m + 1 else None
            if j == 1:
                values.append(float(np.dot(t(a, z[k]), t(a, zu[k]))))
            elif j == 3:
                values.append(float(np.dot(t(a, z[k]), t(a, z[k]))))
            elif j == 2:
                values.append(float(np.dot(t(a, z[k]), t(a, zu[nxt]))))
            else:
                values.append(float(np.dot(t(a, z[k]), t(a, z[nxt]))))
        averages.append(math.fsum(values) / len(values))
    return math.fsum(averages) / len(averages)


@pytest.fixture
def brute_force():
    return brute_force_ustat

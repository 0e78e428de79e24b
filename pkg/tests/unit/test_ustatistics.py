"""
Unit Tests für Kernel und U-Statistiken
"""

import math
from itertools import permutations

import numpy as np
import pytest

from metricsens.errors import ArityError, ConfigurationError, TupleBudgetError
from metricsens.metricspace.families import FamilyKind, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.metricspace.spaces import ScalarSpace, VectorSpace
from metricsens.ustat_engine.kernels import KernelSet, kernel_phi, symmetrize, symmetrize_indexed
from metricsens.ustat_engine.ustatistics import (
    UStatConfig,
    UStatMode,
    complete_ustat,
    incomplete_ustat,
    ustat_components,
)

SCALAR = ScalarSpace()
PLANE = VectorSpace(2)

ORACLE_CASES = [
    (FamilyKind.SOBOL_VALUE, SCALAR),
    (FamilyKind.SOBOL_VECTOR, PLANE),
    (FamilyKind.HALF_SPACE_CVM, SCALAR),
    (FamilyKind.HALF_SPACE_CVM, PLANE),
    (FamilyKind.METRIC_BALL, PLANE),
    (FamilyKind.MIDPOINT_BALL, PLANE),
    (FamilyKind.INTERSECTION_BALL, PLANE),
]


def _data(n: int, space, seed: int = 3) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed + n)
    if space is SCALAR:
        # Eine Dezimale: Bindungen testen die geschlossenen Ungleichungen
        z = np.round(rng.normal(size=n), 1)
        zu = np.round(0.5 * z + rng.normal(size=n), 1)
        return z, zu
    z = rng.normal(size=(n, 2))
    return z, 0.5 * z + rng.normal(size=(n, 2))


# ==================== Kernel ====================


def test_kernel_examples():
    """Test: Kernel-Werte aus Hand-Rechnung"""
    sobol = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    cvm = TestFamily(FamilyKind.HALF_SPACE_CVM, SCALAR)

    assert kernel_phi(1, cvm, [(0.5, 0.9), (0.3, 0.7)]) == 0.0
    assert kernel_phi(1, sobol, [(2.0, 3.0)]) == 6.0
    assert kernel_phi(3, sobol, [(2.0, 3.0)]) == 4.0
    assert symmetrize(2, sobol, [(1.0, 2.0), (3.0, 4.0)]) == pytest.approx(5.0)


def test_kernel_orders():
    """Test: M(1)=M(3)=m+1, M(2)=M(4)=m+2"""
    ball = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    assert KernelSet(ball).orders == (3, 4, 3, 4)
    assert KernelSet(TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)).orders == (1, 2, 1, 2)


def test_kernel_wrong_arity():
    """Test: Falsche Tupel-Länge"""
    sobol = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    with pytest.raises(ArityError):
        kernel_phi(2, sobol, [(1.0, 2.0)])
    with pytest.raises(ArityError):
        kernel_phi(5, sobol, [(1.0, 2.0)])


def test_indicator_phi3_idempotent():
    """Test: Phi_3 = Phi_3^2 für Indikatoren"""
    cvm = TestFamily(FamilyKind.HALF_SPACE_CVM, SCALAR)
    for pairs in ([(0.2, 0.1), (0.1, 0.4)], [(0.2, 0.1), (0.9, 0.4)]):
        value = kernel_phi(3, cvm, pairs)
        assert value == value * value


def test_symmetrize_permutation_invariant():
    """Test: Symmetrisierung hängt nicht von der Reihenfolge ab"""
    family = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    rng = np.random.default_rng(0)
    pairs = [(rng.normal(size=2), rng.normal(size=2)) for _ in range(4)]
    reference = symmetrize(4, family, pairs)
    for perm in list(permutations(range(4)))[::5]:
        assert symmetrize(4, family, [pairs[i] for i in perm]) == pytest.approx(reference, abs=1e-15)


def test_symmetrize_identical_pairs():
    """Test: Identische Paare -> Rohwert"""
    sobol = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    pairs = [(1.5, 2.5), (1.5, 2.5)]
    assert symmetrize(2, sobol, pairs) == kernel_phi(2, sobol, pairs)


def test_symmetrize_indexed_matches_pointwise():
    """Test: Vektorisierte Symmetrisierung = punktweise"""
    family = TestFamily(FamilyKind.INTERSECTION_BALL, PLANE)
    z, zu = _data(6, PLANE)
    geom = SampleGeometry(z, zu, PLANE)
    idx = np.array([[0, 1, 2, 3], [5, 4, 1, 0]])
    values = symmetrize_indexed(4, family, geom, idx)
    for row, value in zip(idx, values, strict=True):
        assert value == pytest.approx(symmetrize(4, family, [(z[i], zu[i]) for i in row]))


# ==================== Vollständige U-Statistiken ====================


@pytest.mark.parametrize("n", [5, 6, 7, 8])
@pytest.mark.parametrize("kind,space", ORACLE_CASES)
def test_complete_ustat_matches_brute_force(n, kind, space, brute_force, sample_factory):
    """Test: exakt und faktorisiert = unabhängige Enumeration"""
    family = TestFamily(kind, space)
    z, zu = _data(n, space)
    sample = sample_factory(z, zu, space=space)
    for j in (1, 2, 3, 4):
        expected = brute_force(j, z, zu, kind.value, family.m)
        exact = complete_ustat(j, sample, family, UStatMode.EXACT)
        factorized = complete_ustat(j, sample, family, UStatMode.FACTORIZED)
        assert exact == pytest.approx(expected, rel=1e-12, abs=1e-12)
        assert factorized == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_single_tuple_when_n_equals_order(sample_factory):
    """Test: N = M(j) -> genau ein Tupel"""
    family = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    sample = sample_factory([1.0, 3.0], [2.0, 4.0], space=SCALAR)
    assert complete_ustat(2, sample, family, UStatMode.EXACT) == pytest.approx(5.0)


def test_sobol_closed_forms(scalar_sample):
    """Test: U_1..U_4 für T(x)=x in geschlossener Form"""
    family = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    z, zu, n = scalar_sample.z, scalar_sample.zu, scalar_sample.n
    geom = SampleGeometry(z, zu, SCALAR)
    comps = ustat_components(geom, family, UStatConfig(mode=UStatMode.FACTORIZED)).values

    assert comps[0] == pytest.approx(np.sum(z * zu) / n, rel=1e-12)
    assert comps[1] == pytest.approx((z.sum() * zu.sum() - np.sum(z * zu)) / (n * (n - 1)), rel=1e-12, abs=1e-12)
    assert comps[2] == pytest.approx(np.sum(z * z) / n, rel=1e-12)
    assert comps[3] == pytest.approx((z.sum() ** 2 - np.sum(z * z)) / (n * (n - 1)), rel=1e-12, abs=1e-12)


def test_cvm_scalar_counting_matches_generic_path(sample_factory):
    """Test: Zähl-Pfad für skalare CvM = generische Faktorisierung im R^1"""
    z, zu = _data(40, SCALAR)
    scalar = complete_ustat(
        2, sample_factory(z, zu, space=SCALAR), TestFamily(FamilyKind.HALF_SPACE_CVM, SCALAR)
    )
    line = VectorSpace(1)
    generic = complete_ustat(
        2, sample_factory(z[:, None], zu[:, None], space=line), TestFamily(FamilyKind.HALF_SPACE_CVM, line)
    )
    assert scalar == generic


def test_exact_mode_refuses_large_tuple_counts(sample_factory):
    """Test: C(N, M) über dem Limit"""
    z, zu = _data(400, PLANE)
    sample = sample_factory(z, zu, space=PLANE)
    with pytest.raises(TupleBudgetError):
        complete_ustat(2, sample, TestFamily(FamilyKind.METRIC_BALL, PLANE), UStatMode.EXACT)


def test_complete_ustat_needs_enough_rows(sample_factory):
    """Test: N < M(j)"""
    sample = sample_factory([1.0, 2.0], [1.0, 2.0], space=SCALAR)
    with pytest.raises(ArityError):
        complete_ustat(2, sample, TestFamily(FamilyKind.HALF_SPACE_CVM, SCALAR))


# ==================== Unvollständige U-Statistiken ====================


def test_incomplete_exhaustive_budget_equals_complete(sample_factory):
    """Test: D >= C(N, M) -> exakte Enumeration"""
    family = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    z, zu = _data(7, PLANE)
    sample = sample_factory(z, zu, space=PLANE)
    for j in (1, 2, 3, 4):
        budget = math.comb(7, KernelSet(family).order(j))
        assert incomplete_ustat(j, sample, family, budget, seed=1) == complete_ustat(j, sample, family, UStatMode.EXACT)


def test_incomplete_deterministic(sample_factory):
    """Test: Gleicher Seed -> gleicher Wert, auch mit Threads"""
    family = TestFamily(FamilyKind.INTERSECTION_BALL, PLANE)
    z, zu = _data(30, PLANE)
    sample = sample_factory(z, zu, space=PLANE)
    first = incomplete_ustat(2, sample, family, 5000, seed=9)
    assert incomplete_ustat(2, sample, family, 5000, seed=9, workers=4) == first


@pytest.mark.parametrize("mode", [UStatMode.FACTORIZED, UStatMode.INCOMPLETE])
def test_components_identical_across_workers(mode):
    """Test: Ball-Komponenten mit 1 und 4 Threads identisch, Distanzen vorab einmal berechnet"""
    z, zu = _data(40, PLANE)
    family = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    serial = ustat_components(SampleGeometry(z, zu, PLANE), family, UStatConfig(mode=mode, seed=2, workers=1))
    geom = SampleGeometry(z, zu, PLANE)
    threaded = ustat_components(geom, family, UStatConfig(mode=mode, seed=2, workers=4))
    assert threaded.values == serial.values
    assert set(geom._dist) == {"z", "zu"}


def test_incomplete_within_standard_errors(sample_factory):
    """Test: Unvollständig vs. exakt innerhalb weniger Standardfehler"""
    family = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    z, zu = _data(25, PLANE)
    geom = SampleGeometry(z, zu, PLANE)
    exact = ustat_components(geom, family, UStatConfig(mode=UStatMode.EXACT)).values
    approx = ustat_components(geom, family, UStatConfig(mode=UStatMode.INCOMPLETE, tuple_budget=4000, seed=2))
    assert approx.std_errors is not None
    for value, reference, se in zip(approx.values, exact, approx.std_errors, strict=True):
        assert abs(value - reference) <= 4.0 * se + 1e-12


def test_incomplete_budget_below_n_rejected(sample_factory):
    """Test: D < N im incomplete-Modus"""
    family = TestFamily(FamilyKind.METRIC_BALL, PLANE)
    z, zu = _data(30, PLANE)
    geom = SampleGeometry(z, zu, PLANE)
    with pytest.raises(ConfigurationError):
        ustat_components(geom, family, UStatConfig(mode=UStatMode.INCOMPLETE, tuple_budget=10))


def test_auto_mode_selection():
    """Test: faktorisiert für m <= 1, unvollständig für Bälle"""
    config = UStatConfig()
    assert config.resolve(TestFamily(FamilyKind.HALF_SPACE_CVM, SCALAR), 100) is UStatMode.FACTORIZED
    assert config.resolve(TestFamily(FamilyKind.METRIC_BALL, PLANE), 100) is UStatMode.INCOMPLETE


def test_vector_sobol_components_sum_coordinates():
    """Test: sobol_vector-Komponenten = Summe der skalaren Sobol-Komponenten je Koordinate"""
    rng = np.random.default_rng(21)
    z = rng.normal(loc=1.0, size=(50, 3))
    zu = 0.3 * z + rng.normal(size=(50, 3))
    config = UStatConfig(mode=UStatMode.FACTORIZED)

    space = VectorSpace(3)
    vector = ustat_components(SampleGeometry(z, zu, space), TestFamily(FamilyKind.SOBOL_VECTOR, space), config)
    sobol = TestFamily(FamilyKind.SOBOL_VALUE, SCALAR)
    per_coordinate = [
        ustat_components(SampleGeometry(z[:, k], zu[:, k], SCALAR), sobol, config).values for k in range(3)
    ]
    for j in range(4):
        assert vector.values[j] == pytest.approx(sum(c[j] for c in per_coordinate), rel=1e-12)

"""
Unit Tests für den GMS-Indexschätzer
"""

import numpy as np
import pytest

from metricsens.errors import ArityError, DegenerateVarianceError, IntervalError, MetricSensError
from metricsens.inference import attach_interval
from metricsens.metricspace.families import FamilyKind, TestFamily
from metricsens.metricspace.spaces import ScalarSpace, VectorSpace
from metricsens.models.lognormal import lognormal_model, lognormal_references
from metricsens.sampling.design import InputModel, SubsetU, pick_freeze
from metricsens.sampling.distributions import StandardNormal
from metricsens.ustat_engine import UStatConfig, UStatMode, estimate_gms_index, psi
from metricsens.ustat_engine.estimator import IndexEstimate


def test_psi_examples():
    """Test: Psi(2,1,4,2) = 0.5, gleiche Zählerterme -> 0"""
    assert psi(2.0, 1.0, 4.0, 2.0) == 0.5
    assert psi(0.3, 0.3, 1.0, 0.5) == 0.0


def test_psi_degenerate_denominator():
    """Test: z = t"""
    with pytest.raises(DegenerateVarianceError):
        psi(1.0, 0.5, 2.0, 2.0)
    with pytest.raises(DegenerateVarianceError):
        psi(1.0, 0.5, 1e6, 1e6 * (1 + 1e-14))


def test_identical_columns_give_one(sample_factory):
    """Test: Z = Z^u -> U_1 = U_3, U_2 = U_4 -> Index 1"""
    rng = np.random.default_rng(0)
    z = rng.normal(size=50)
    estimate = estimate_gms_index(sample_factory(z, z.copy()), TestFamily(FamilyKind.SOBOL_VALUE, ScalarSpace()))
    assert estimate.value == pytest.approx(1.0, abs=1e-12)


def test_constant_output_is_degenerate(sample_factory):
    """Test: T-konstante Ausgabe für CvM"""
    sample = sample_factory(np.full(10, 2.0), np.full(10, 2.0))
    with pytest.raises(DegenerateVarianceError):
        estimate_gms_index(sample, TestFamily(FamilyKind.HALF_SPACE_CVM, ScalarSpace()))


def test_centering_does_not_change_value(sample_factory):
    """Test: Zentrierte und rohe Akkumulation stimmen überein"""
    rng = np.random.default_rng(4)
    z = 1000.0 + rng.normal(size=200)
    zu = 0.7 * (z - 1000.0) + 1000.0 + 0.5 * rng.normal(size=200)
    sample = sample_factory(z, zu)
    family = TestFamily(FamilyKind.SOBOL_VALUE, ScalarSpace())

    centered = estimate_gms_index(sample, family, UStatConfig(center=True))
    raw = estimate_gms_index(sample, family, UStatConfig(center=False))
    assert centered.shift == pytest.approx(1000.0, abs=0.5)
    assert raw.shift == 0.0
    assert centered.value == pytest.approx(raw.value, rel=1e-6)


def test_too_few_rows(sample_factory):
    """Test: N < m + 2"""
    sample = sample_factory(np.zeros((3, 2)), np.ones((3, 2)), space=VectorSpace(2))
    with pytest.raises(ArityError):
        estimate_gms_index(sample, TestFamily(FamilyKind.METRIC_BALL, VectorSpace(2)))


def test_estimate_fields(scalar_sample):
    """Test: Komponenten und Metadaten im Ergebnis"""
    estimate = estimate_gms_index(scalar_sample, TestFamily(FamilyKind.HALF_SPACE_CVM, ScalarSpace()))
    assert estimate.n == 7
    assert estimate.family == "halfspace_cvm"
    assert estimate.subset == "{1}"
    assert estimate.mode == "factorized"
    assert estimate.value == pytest.approx(psi(*estimate.components))


def test_interval_must_contain_value():
    """Test: Intervall ohne den Schätzwert"""
    with pytest.raises(IntervalError):
        IndexEstimate(value=0.5, components=(1.0, 0.5, 2.0, 1.0), n=10, ci=(0.6, 0.9))
    assert issubclass(IntervalError, MetricSensError)


def test_cvm_toy_consistency():
    """Test: CvM-Index von X2 im Spielzeugmodell bei N = 20000"""
    model = lognormal_model()
    sample = pick_freeze(model.input_model, SubsetU((2,)), 20_000, seed=1)
    estimate = estimate_gms_index(sample, TestFamily(FamilyKind.HALF_SPACE_CVM, ScalarSpace()))
    assert estimate.value == pytest.approx(lognormal_references()["cvm_2"], abs=0.05)


def test_ball_family_incomplete_mode(vector_sample):
    """Test: Ball-Familie im incomplete-Modus liefert Standardfehler"""
    family = TestFamily(FamilyKind.METRIC_BALL, VectorSpace(2))
    config = UStatConfig(mode=UStatMode.INCOMPLETE, tuple_budget=100, seed=3)
    estimate = estimate_gms_index(vector_sample, family, config)
    assert estimate.mode == "incomplete"
    assert estimate.std_errors is not None and len(estimate.std_errors) == 4
    assert estimate_gms_index(vector_sample, family, config).value == estimate.value


# ==================== Vektorwertige Sobol-Indizes ====================

MIXING = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]])


def _linear_vector_model() -> InputModel:
    """Y = A X im R^2 mit drei standardnormalen Eingängen"""
    return InputModel(
        name="linear_vector",
        dists=[StandardNormal() for _ in range(3)],
        func=lambda x: x @ MIXING.T,
        vectorized=True,
        space=VectorSpace(2),
    )


@pytest.mark.parametrize("u", [1, 2, 3])
def test_vector_sobol_matches_trace_ratio(u):
    """Test: sobol_vector = ||A_u||^2 / ||A||_F^2 (Spur-Verhältnis) für ein lineares Modell"""
    sample = pick_freeze(_linear_vector_model(), SubsetU((u,)), 20_000, seed=4)
    family = TestFamily(FamilyKind.SOBOL_VECTOR, VectorSpace(2))
    estimate = attach_interval(estimate_gms_index(sample, family), sample, family)

    expected = np.sum(MIXING[:, u - 1] ** 2) / np.sum(MIXING**2)
    assert estimate.value == pytest.approx(expected, abs=0.02)
    assert estimate.ci_method == "delta"
    assert 0.0 < estimate.sigma < 2.0


def test_vector_sobol_on_scalars_equals_sobol_value(scalar_sample):
    """Test: sobol_vector im R^1 fällt mit sobol_value zusammen"""
    scalar = estimate_gms_index(scalar_sample, TestFamily(FamilyKind.SOBOL_VALUE, ScalarSpace()))
    vector = estimate_gms_index(scalar_sample, TestFamily(FamilyKind.SOBOL_VECTOR, ScalarSpace()))
    assert vector.value == scalar.value
    assert vector.components == scalar.components


def test_vector_sobol_centering_is_shift_invariant(sample_factory):
    """Test: Koordinatenweise Zentrierung ändert den Index nicht"""
    rng = np.random.default_rng(8)
    z = rng.normal(size=(200, 3))
    zu = 0.4 * z + rng.normal(size=(200, 3))
    offset = np.array([500.0, -20.0, 3.0])
    family = TestFamily(FamilyKind.SOBOL_VECTOR, VectorSpace(3))

    centered = estimate_gms_index(sample_factory(z + offset, zu + offset, space=VectorSpace(3)), family)
    raw = estimate_gms_index(sample_factory(z, zu, space=VectorSpace(3)), family, UStatConfig(center=False))
    assert centered.value == pytest.approx(raw.value, rel=1e-9)
    assert isinstance(centered.shift, tuple) and len(centered.shift) == 3

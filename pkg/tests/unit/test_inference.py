"""
Unit Tests für Hajek-Projektionen, Delta-Methode und Bootstrap
"""

from itertools import combinations

import numpy as np
import pytest

from metricsens.errors import BootstrapError, ConfigurationError, DegenerateVarianceError, IntervalError
from metricsens.inference import (
    CIMethod,
    attach_interval,
    bootstrap_ci,
    bootstrap_geometry,
    confidence_interval,
    delta_variance,
    estimate_gamma,
    hajek_projection,
    psi_gradient,
    resolve_method,
)
from metricsens.metricspace.families import FamilyKind, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.metricspace.spaces import ScalarSpace, VectorSpace
from metricsens.ustat_engine import UStatConfig, UStatMode, estimate_gms_index
from metricsens.ustat_engine.estimator import IndexEstimate
from metricsens.ustat_engine.kernels import KernelSet, symmetrize

SOBOL = TestFamily(FamilyKind.SOBOL_VALUE, ScalarSpace())
CVM = TestFamily(FamilyKind.HALF_SPACE_CVM, ScalarSpace())


def _estimate(value: float = 0.5, n: int = 100) -> IndexEstimate:
    return IndexEstimate(value=value, components=(2.0, 1.0, 4.0, 2.0), n=n)


# ==================== Delta-Methode ====================


def test_delta_variance_identity_gamma():
    """Test: Gamma = I, Komponenten (2,1,4,2) -> sigma^2 = 0.625"""
    assert delta_variance(np.eye(4), (2.0, 1.0, 4.0, 2.0)) == pytest.approx(0.625)
    assert delta_variance(np.zeros((4, 4)), (2.0, 1.0, 4.0, 2.0)) == 0.0


def test_delta_variance_floors_negative():
    """Test: Negative Varianz aus Rundung wird auf 0 gesetzt"""
    assert delta_variance(-np.eye(4), (2.0, 1.0, 4.0, 2.0)) == 0.0


def test_gradient_degenerate():
    """Test: Gradient bei z = t"""
    with pytest.raises(DegenerateVarianceError):
        psi_gradient((1.0, 0.5, 2.0, 2.0))


def test_confidence_interval_half_width():
    """Test: N=100, sigma=1, 95% -> Halbbreite 0.19600"""
    lo, hi = confidence_interval(_estimate(), 1.0, 0.95)
    assert (hi - lo) / 2 == pytest.approx(0.19600, abs=1e-5)
    assert (lo + hi) / 2 == pytest.approx(0.5)


def test_confidence_interval_invalid_arguments():
    """Test: Niveau außerhalb (0,1), negatives oder NaN-sigma"""
    with pytest.raises(ConfigurationError):
        confidence_interval(_estimate(), 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        confidence_interval(_estimate(), 1.0, 0.0)
    with pytest.raises(ConfigurationError):
        confidence_interval(_estimate(), -1.0)
    with pytest.raises(IntervalError):
        confidence_interval(_estimate(), float("nan"))


# ==================== Projektionen ====================


def test_sobol_projection_matches_enumeration(sample_factory):
    """Test: h_2(i) für T(x)=x bei N=6 gegen Mittel über alle Partner"""
    rng = np.random.default_rng(2)
    z, zu = rng.normal(size=6), rng.normal(size=6)
    sample = sample_factory(z, zu)
    for i in range(6):
        expected = np.mean([symmetrize(2, SOBOL, [(z[i], zu[i]), (z[k], zu[k])]) for k in range(6) if k != i])
        assert hajek_projection(2, sample, SOBOL, i, center=False) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_order_one_projection_is_kernel(sample_factory):
    """Test: M(j) = 1 -> h_j(i) = Phi_j(i)"""
    z, zu = np.array([1.0, 2.0, 3.0]), np.array([0.5, -1.0, 4.0])
    sample = sample_factory(z, zu)
    assert hajek_projection(1, sample, SOBOL, 2, center=False) == 12.0
    assert hajek_projection(3, sample, SOBOL, 1, center=False) == 4.0


def test_exact_cvm_projection_matches_enumeration(scalar_sample):
    """Test: C(N-1, M-1) <= L -> exakte Mittelung über alle Partner-Tupel"""
    z, zu, n = scalar_sample.z, scalar_sample.zu, scalar_sample.n
    for j in (1, 2, 3, 4):
        order = KernelSet(CVM).order(j)
        for i in (0, 2, 6):
            others = [k for k in range(n) if k != i]
            expected = np.mean(
                [
                    symmetrize(j, CVM, [(z[i], zu[i])] + [(z[k], zu[k]) for k in combo])
                    for combo in combinations(others, order - 1)
                ]
            )
            assert hajek_projection(j, scalar_sample, CVM, i, tuples=200) == pytest.approx(expected, abs=1e-12)


def test_projection_matches_gamma_column(vector_sample):
    """Test: Einzelprojektion = Spalte der Projektionsmatrix, auch gesampelt"""
    family = TestFamily(FamilyKind.METRIC_BALL, VectorSpace(2))
    gamma = estimate_gamma(vector_sample, family, tuples=5, seed=3)
    assert gamma.exact == (False, False, False, False)
    for i in (0, 4):
        assert hajek_projection(2, vector_sample, family, i, tuples=5, seed=3) == gamma.projections[i, 1]


def test_gamma_symmetric_psd(vector_sample):
    """Test: Gamma symmetrisch und positiv semidefinit"""
    family = TestFamily(FamilyKind.INTERSECTION_BALL, VectorSpace(2))
    gamma = estimate_gamma(vector_sample, family, tuples=50, seed=1)
    assert gamma.gamma.shape == (4, 4)
    assert np.array_equal(gamma.gamma, gamma.gamma.T)
    assert gamma.eigenvalues().min() >= -1e-12


def test_gamma_deterministic_across_workers(vector_sample):
    """Test: Projektionen hängen nicht von der Worker-Zahl ab"""
    family = TestFamily(FamilyKind.METRIC_BALL, VectorSpace(2))
    one = estimate_gamma(vector_sample, family, tuples=5, seed=8, workers=1)
    four = estimate_gamma(vector_sample, family, tuples=5, seed=8, workers=4)
    assert np.array_equal(one.gamma, four.gamma)


# ==================== Bootstrap ====================


def test_bootstrap_endpoints_are_replicates(sample_factory):
    """Test: Perzentil-Endpunkte stammen aus den Replikaten"""
    sample = sample_factory([0.0, 1.0, 3.0, 7.0], [0.5, 0.0, 3.5, 6.0])
    geom = SampleGeometry(sample.z, sample.zu, ScalarSpace())
    result = bootstrap_geometry(geom, SOBOL, 200, 0.9, UStatConfig(center=False), seed=4)
    assert result.lo in result.replicates
    assert result.hi in result.replicates
    assert result.lo <= result.hi
    assert len(result.replicates) + result.dropped == 200


def test_bootstrap_deterministic(scalar_sample):
    """Test: Gleicher Seed -> gleiches Intervall, unabhängig von Workern"""
    first = bootstrap_ci(scalar_sample, CVM, replicates=100, seed=6)
    again = bootstrap_ci(scalar_sample, CVM, replicates=100, seed=6, config=UStatConfig(workers=4))
    assert first == again


def test_bootstrap_constant_output(sample_factory):
    """Test: Konstante Ausgabe -> alle Replikate degeneriert"""
    sample = sample_factory(np.full(8, 1.5), np.full(8, 1.5))
    with pytest.raises(BootstrapError):
        bootstrap_ci(sample, SOBOL, replicates=60)


def test_bootstrap_needs_enough_replicates(scalar_sample):
    """Test: B < 50"""
    with pytest.raises(ConfigurationError):
        bootstrap_ci(scalar_sample, CVM, replicates=10)


# ==================== Intervalle an Schätzungen ====================


@pytest.mark.parametrize("method", [CIMethod.DELTA, CIMethod.BOOTSTRAP])
def test_attach_interval_contains_value(method, sample_factory):
    """Test: Intervall enthält den Punktschätzer"""
    rng = np.random.default_rng(21)
    z = rng.normal(size=60)
    sample = sample_factory(z, 0.6 * z + 0.8 * rng.normal(size=60))
    estimate = estimate_gms_index(sample, CVM)
    attached = attach_interval(estimate, sample, CVM, method=method, replicates=100, seed=2)

    assert attached.ci is not None
    assert attached.ci[0] <= attached.value <= attached.ci[1]
    assert attached.ci_method == method.value
    assert attached.sigma is not None and attached.sigma > 0.0


def test_auto_method_switches_on_cost():
    """Test: auto -> delta für Sobol, bootstrap bei riesigem L"""
    ball = TestFamily(FamilyKind.METRIC_BALL, VectorSpace(2))
    assert resolve_method(CIMethod.AUTO, SOBOL, 10**6, 200) is CIMethod.DELTA
    assert resolve_method(CIMethod.AUTO, ball, 10**6, 200) is CIMethod.BOOTSTRAP
    assert resolve_method(CIMethod.AUTO, ball, 1000, 200) is CIMethod.DELTA
    assert resolve_method(CIMethod.DELTA, ball, 10**6, 200) is CIMethod.DELTA


def test_delta_sigma_for_gaussian_pair(sample_factory):
    """Test: sigma der Delta-Methode für ein Gauß-Paar mit Korrelation 0.5"""
    rng = np.random.default_rng(9)
    z = rng.normal(size=500)
    zu = 0.5 * z + np.sqrt(0.75) * rng.normal(size=500)
    sample = sample_factory(z, zu)
    estimate = estimate_gms_index(sample, SOBOL, UStatConfig(mode=UStatMode.FACTORIZED))
    attached = attach_interval(estimate, sample, SOBOL, method=CIMethod.DELTA)
    # Var(Z Z^u - rho Z^2) = 1 - rho^2
    assert attached.sigma == pytest.approx(np.sqrt(0.75), rel=0.15)

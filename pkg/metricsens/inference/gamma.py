"""
Hajek-Projektionen und Kovarianzmatrix Gamma
Geschätzte bedingte Erwartungen E[Phi_j^s | Z_1] je Zeile, daraus Gamma(i,j)
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from metricsens.config import settings
from metricsens.metricspace.families import BALL_KINDS, SOBOL_KINDS, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.parallel import chunk_ranges, make_rng, map_chunks
from metricsens.sampling.design import PairedSample
from metricsens.ustat_engine.estimator import centered_geometry
from metricsens.ustat_engine.kernels import KERNELS, KernelSet, symmetrize_indexed
from metricsens.ustat_engine.ustatistics import draw_distinct_tuples

_PROJECTION_STREAM = 10


@dataclass(frozen=True)
class GammaEstimate:
    gamma: np.ndarray  # 4 x 4
    projections: np.ndarray  # N x 4, Spalte j-1 = h_j(i)
    exact: tuple[bool, bool, bool, bool]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.gamma)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a * b if a.ndim == 1 else np.einsum("ik,ik->i", a, b)


def _total(x: np.ndarray) -> float | np.ndarray:
    if x.ndim == 1:
        return math.fsum(x)
    return np.array([math.fsum(col) for col in x.T])


def _sobol_projections(j: int, geom: SampleGeometry) -> np.ndarray:
    """Exakte Mittel über alle Partnerzeilen für T(x) = x, Skalarprodukt bei Vektoren"""
    z, zu = geom.z, geom.zu
    n = geom.n
    if j == 1:
        return _dot(z, zu)
    if j == 3:
        return _dot(z, z)
    if j == 2:
        # Phi_2^s(i, l) = (<z_i, zu_l> + <z_l, zu_i>) / 2
        return (_dot(z, _total(zu) - zu) + _dot(zu, _total(z) - z)) / (2.0 * (n - 1))
    return _dot(z, _total(z) - z) / (n - 1)


def _partner_combos(n: int, size: int) -> np.ndarray:
    return np.asarray(list(combinations(range(n - 1), size)), dtype=np.int64).reshape(-1, size)


def _projection_chunk(
    j: int,
    family: TestFamily,
    geom: SampleGeometry,
    bounds: tuple[int, int],
    chunk_id: int,
    tuples: int,
    seed: int,
) -> tuple[np.ndarray, bool]:
    n = geom.n
    order = KernelSet(family).order(j)
    rows = np.arange(*bounds, dtype=np.int64)

    if order == 1:
        idx = rows[:, None]
        return symmetrize_indexed(j, family, geom, idx), True

    count = math.comb(n - 1, order - 1)
    if count <= tuples:
        partners = np.broadcast_to(_partner_combos(n, order - 1), (len(rows), count, order - 1))
        exact = True
    else:
        rng = make_rng(seed, _PROJECTION_STREAM + j, chunk_id)
        partners = draw_distinct_tuples(rng, n - 1, order - 1, len(rows) * tuples)
        partners = partners.reshape(len(rows), tuples, order - 1)
        exact = False

    # Partner-Indizes aus {0..N-2} auf die Zeilen ohne i abbilden
    partners = partners + (partners >= rows[:, None, None])
    first = np.broadcast_to(rows[:, None, None], partners.shape[:2] + (1,))
    idx = np.concatenate([first, partners], axis=2).reshape(-1, order)
    values = symmetrize_indexed(j, family, geom, idx).reshape(len(rows), -1)
    return values.mean(axis=1), exact


def _projections(
    j: int,
    family: TestFamily,
    geom: SampleGeometry,
    tuples: int,
    seed: int,
    workers: int | None,
) -> tuple[np.ndarray, bool]:
    if family.kind in SOBOL_KINDS:
        return _sobol_projections(j, geom), True
    chunks = list(enumerate(chunk_ranges(geom.n)))
    parts = map_chunks(
        lambda item: _projection_chunk(j, family, geom, item[1], item[0], tuples, seed),
        chunks,
        workers,
    )
    return np.concatenate([p[0] for p in parts]), all(p[1] for p in parts)


def hajek_projection(
    j: int,
    sample: PairedSample,
    family: TestFamily,
    i: int,
    tuples: int | None = None,
    seed: int = 0,
    center: bool = True,
) -> float:
    """
    Schätzt E[Phi_j^s | Z_i] über L Tupel mit Zeile i im ersten Slot.

    Gibt denselben Wert wie die Spalte j von estimate_gamma(...).projections.
    """
    tuples = tuples or settings.projection_tuples
    geom, _ = centered_geometry(sample, family, center)
    if family.kind in SOBOL_KINDS:
        return float(_sobol_projections(j, geom)[i])
    chunk_id, bounds = next(
        (c, b) for c, b in enumerate(chunk_ranges(geom.n)) if b[0] <= i < b[1]
    )
    values, _ = _projection_chunk(j, family, geom, bounds, chunk_id, tuples, seed)
    return float(values[i - bounds[0]])


def gamma_from_projections(projections: np.ndarray, orders: tuple[int, ...]) -> np.ndarray:
    scale = np.outer(orders, orders).astype(float)
    cov = np.atleast_2d(np.cov(projections, rowvar=False, ddof=1))
    gamma = scale * cov
    return (gamma + gamma.T) / 2.0


def estimate_gamma_geometry(
    geom: SampleGeometry,
    family: TestFamily,
    tuples: int | None = None,
    seed: int = 0,
    workers: int | None = None,
) -> GammaEstimate:
    tuples = tuples or settings.projection_tuples
    if family.kind in BALL_KINDS:
        geom.prefetch()
    cols, exact = [], []
    for j in KERNELS:
        h, is_exact = _projections(j, family, geom, tuples, seed, workers)
        cols.append(h)
        exact.append(is_exact)
    projections = np.column_stack(cols)
    gamma = gamma_from_projections(projections, KernelSet(family).orders)
    return GammaEstimate(gamma, projections, tuple(exact))  # type: ignore[arg-type]


def estimate_gamma(
    sample: PairedSample,
    family: TestFamily,
    tuples: int | None = None,
    seed: int = 0,
    center: bool = True,
    workers: int | None = None,
) -> GammaEstimate:
    """Gamma(i,j) = M(i) M(j) Cov(h_i, h_j) über die Zeilen"""
    geom, _ = centered_geometry(sample, family, center)
    return estimate_gamma_geometry(geom, family, tuples, seed, workers)

"""
U-Statistiken
Exakte Enumeration, faktorisierte Summen über Parameter-Tupel und unvollständige
U-Statistiken mit zufälligen Tupeln
"""

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations, islice

import numpy as np
from loguru import logger

from metricsens.config import settings
from metricsens.errors import ArityError, ConfigurationError, TupleBudgetError
from metricsens.metricspace.families import BALL_KINDS, FamilyKind, TestFamily
from metricsens.metricspace.geometry import SampleGeometry
from metricsens.parallel import chunk_ranges, fsum_columns, make_rng, map_chunks
from metricsens.sampling.design import PairedSample
from metricsens.ustat_engine.kernels import KERNELS, KernelSet, symmetrize_indexed


class UStatMode(str, Enum):
    AUTO = "auto"
    EXACT = "exact"
    FACTORIZED = "factorized"
    INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class UStatConfig:
    mode: UStatMode = UStatMode.AUTO
    tuple_budget: int | None = None  # D im incomplete-Modus
    seed: int = 0
    center: bool = True  # zentrierte Akkumulation für die Sobol-Familien
    workers: int | None = None

    def resolve(self, family: TestFamily, n: int) -> UStatMode:
        """auto: faktorisiert für m <= 1, unvollständig für die Ball-Familien"""
        if self.mode is not UStatMode.AUTO:
            mode = self.mode
        else:
            mode = UStatMode.FACTORIZED if family.m <= 1 else UStatMode.INCOMPLETE
        if mode is UStatMode.INCOMPLETE and self.tuple_budget is not None and self.tuple_budget < n:
            raise ConfigurationError(f"Incomplete mode needs D >= N, got D={self.tuple_budget} < N={n}")
        return mode

    def budget(self, n: int, order: int) -> int:
        d = self.tuple_budget or settings.incomplete_default_budget
        return min(d, math.comb(n, order))


@dataclass(frozen=True)
class UStatComponents:
    values: tuple[float, float, float, float]
    std_errors: tuple[float, float, float, float] | None = None
    mode: UStatMode = UStatMode.FACTORIZED
    budgets: tuple[int, int, int, int] | None = None


def falling_factorial(n: int, k: int) -> int:
    return math.perm(n, k)


def _check_rows(j: int, n: int, family: TestFamily) -> int:
    order = KernelSet(family).order(j)
    if n < order:
        raise ArityError(f"U_{j} needs N >= M({j}) = {order}, got N={n}")
    return order


def geometry_for(sample: PairedSample, family: TestFamily) -> SampleGeometry:
    return SampleGeometry(sample.z, sample.zu, family.space)


# ==================== Exakt ====================


def _exact_ustat(j: int, family: TestFamily, geom: SampleGeometry) -> float:
    n = geom.n
    order = _check_rows(j, n, family)
    total = math.comb(n, order)
    if total > settings.exact_tuple_cap:
        raise TupleBudgetError(
            f"Exact U_{j} needs C({n},{order}) = {total} tuples (cap {settings.exact_tuple_cap}); "
            "use mode 'factorized' or 'incomplete'"
        )

    combos = combinations(range(n), order)
    partials = []
    while True:
        block = list(islice(combos, settings.incomplete_chunk))
        if not block:
            break
        values = symmetrize_indexed(j, family, geom, np.asarray(block, dtype=np.int64))
        partials.append(math.fsum(values))
    return math.fsum(partials) / total


# ==================== Faktorisiert ====================


def _parameter_tuples(family: TestFamily, n: int, start: int, stop: int) -> tuple[np.ndarray, ...]:
    """Geordnete Parameter-Tupel mit paarweise verschiedenen Indizes, Nummern [start, stop)"""
    t = np.arange(start, stop, dtype=np.int64)
    if family.m == 1:
        return (t,)
    first = t // (n - 1)
    rest = t % (n - 1)
    second = rest + (rest >= first)
    return (first, second)


def _parameter_count(family: TestFamily, n: int) -> int:
    return falling_factorial(n, family.m)


def _row_sums(values: np.ndarray, exact_ints: bool) -> np.ndarray:
    if exact_ints:
        return values.sum(axis=1)
    return np.array([math.fsum(row) for row in values])


def _factorized_chunk(
    family: TestFamily, geom: SampleGeometry, bounds: tuple[int, int]
) -> tuple[float, float, float, float]:
    n = geom.n
    points = np.arange(n)[None, :]
    if family.m == 0:
        a: tuple[np.ndarray, ...] = ()
        rows = 1
    else:
        a = tuple(col[:, None] for col in _parameter_tuples(family, n, *bounds))
        rows = bounds[1] - bounds[0]

    t = np.broadcast_to(family.evaluate_indexed(geom, a, points, "z"), (rows, n)).copy()
    s = np.broadcast_to(family.evaluate_indexed(geom, a, points, "zu"), (rows, n)).copy()
    # Auswertungspunkte dürfen nicht mit Parameter-Indizes zusammenfallen
    for col in a:
        t[np.arange(rows), col[:, 0]] = 0.0
        s[np.arange(rows), col[:, 0]] = 0.0

    ints = family.is_indicator
    sum_t = _row_sums(t, ints)
    sum_s = _row_sums(s, ints)
    sum_ts = _row_sums(t * s, ints)
    sum_tt = _row_sums(t * t, ints)
    return (
        math.fsum(sum_ts),
        math.fsum(sum_t * sum_s - sum_ts),
        math.fsum(sum_tt),
        math.fsum(sum_t * sum_t - sum_tt),
    )


def _cvm_scalar_sums(geom: SampleGeometry) -> tuple[float, float, float, float]:
    """Halbgeraden-Indikatoren auf skalaren Ausgaben durch Zählen, O(N log N)"""
    z, zu = geom.z, geom.zu
    below_z = np.searchsorted(np.sort(z), z, side="right").astype(np.int64)
    below_zu = np.searchsorted(np.sort(zu), z, side="right").astype(np.int64)
    below_both = np.searchsorted(np.sort(np.maximum(z, zu)), z, side="right").astype(np.int64)
    own = (zu <= z).astype(np.int64)

    sum_t = below_z - 1
    sum_s = below_zu - own
    sum_ts = below_both - own
    return (
        float(sum_ts.sum()),
        float((sum_t * sum_s - sum_ts).sum()),
        float(sum_t.sum()),
        float((sum_t * sum_t - sum_t).sum()),
    )


def _column_sums(x: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(col) for col in x.T])


def _sobol_vector_sums(geom: SampleGeometry) -> tuple[float, float, float, float]:
    """T(x) = x im R^k: Produkte sind Skalarprodukte, Summen über Zeilen und Koordinaten"""
    z, zu = geom.z, geom.zu
    sum_z, sum_zu = _column_sums(z), _column_sums(zu)
    s1 = math.fsum((z * zu).ravel())
    s3 = math.fsum((z * z).ravel())
    return s1, math.fsum(sum_z * sum_zu) - s1, s3, math.fsum(sum_z * sum_z) - s3


def _factorized_sums(
    family: TestFamily, geom: SampleGeometry, workers: int | None
) -> tuple[float, float, float, float]:
    if family.kind is FamilyKind.HALF_SPACE_CVM and geom.z.ndim == 1:
        return _cvm_scalar_sums(geom)
    if family.kind is FamilyKind.SOBOL_VECTOR and geom.z.ndim == 2:
        return _sobol_vector_sums(geom)

    count = _parameter_count(family, geom.n)
    partials = map_chunks(
        lambda bounds: _factorized_chunk(family, geom, bounds),
        chunk_ranges(count),
        workers,
    )
    s1, s2, s3, s4 = fsum_columns(partials)
    return s1, s2, s3, s4


def _normalize(family: TestFamily, n: int, sums: tuple[float, ...]) -> tuple[float, float, float, float]:
    orders = KernelSet(family).orders
    u1, u2, u3, u4 = (s / falling_factorial(n, order) for s, order in zip(sums, orders, strict=True))
    return u1, u2, u3, u4


# ==================== Unvollständig ====================


def draw_distinct_tuples(rng: np.random.Generator, n: int, order: int, size: int) -> np.ndarray:
    """size gleichverteilte Tupel aus order paarweise verschiedenen Indizes < n"""
    out = np.empty((size, order), dtype=np.int64)
    for k in range(order):
        r = rng.integers(0, n - k, size=size)
        taken = np.sort(out[:, :k], axis=1)
        for col in range(k):
            r += r >= taken[:, col]
        out[:, k] = r
    return out


def _incomplete_ustat(
    j: int,
    family: TestFamily,
    geom: SampleGeometry,
    budget: int,
    seed: int,
    workers: int | None,
) -> tuple[float, float]:
    """(Mittelwert, Standardfehler) über budget zufällige Tupel"""
    n = geom.n
    order = _check_rows(j, n, family)
    if budget < 1:
        raise ConfigurationError(f"Tuple budget D must be >= 1, got {budget}")

    if budget >= math.comb(n, order) and math.comb(n, order) <= settings.exact_tuple_cap:
        logger.debug(f"U_{j}: budget covers all C({n},{order}) tuples, enumerating")
        return _exact_ustat(j, family, geom), 0.0

    def run_chunk(item: tuple[int, tuple[int, int]]) -> tuple[float, float]:
        chunk_id, (start, stop) = item
        rng = make_rng(seed, j, chunk_id)
        idx = draw_distinct_tuples(rng, n, order, stop - start)
        values = symmetrize_indexed(j, family, geom, idx)
        return math.fsum(values), math.fsum(values * values)

    chunks = list(enumerate(chunk_ranges(budget, settings.incomplete_chunk)))
    total, total_sq = fsum_columns(map_chunks(run_chunk, chunks, workers))
    mean = total / budget
    var = max(total_sq / budget - mean * mean, 0.0) * budget / max(budget - 1, 1)
    return mean, math.sqrt(var / budget)


# ==================== Öffentliche API ====================


def complete_ustat(
    j: int,
    sample: PairedSample,
    family: TestFamily,
    mode: UStatMode = UStatMode.FACTORIZED,
    workers: int | None = None,
) -> float:
    """U_{j,N} über alle Index-Tupel, exakt enumeriert oder faktorisiert"""
    geom = geometry_for(sample, family)
    _check_rows(j, geom.n, family)
    if mode is UStatMode.EXACT:
        return _exact_ustat(j, family, geom)
    if mode is not UStatMode.FACTORIZED:
        raise ConfigurationError(f"complete_ustat supports exact/factorized, got {mode.value}")
    sums = _factorized_sums(family, geom, workers)
    return _normalize(family, geom.n, sums)[j - 1]


def incomplete_ustat(
    j: int,
    sample: PairedSample,
    family: TestFamily,
    budget: int,
    seed: int,
    workers: int | None = None,
) -> float:
    geom = geometry_for(sample, family)
    return _incomplete_ustat(j, family, geom, budget, seed, workers)[0]


def ustat_components(
    geom: SampleGeometry, family: TestFamily, config: UStatConfig
) -> UStatComponents:
    """Alle vier U-Statistiken in einem Durchgang"""
    n = geom.n
    for j in KERNELS:
        _check_rows(j, n, family)
    mode = config.resolve(family, n)
    if family.kind in BALL_KINDS:
        geom.prefetch()

    if mode is UStatMode.EXACT:
        values = tuple(_exact_ustat(j, family, geom) for j in KERNELS)
        return UStatComponents(values, mode=mode)  # type: ignore[arg-type]
    if mode is UStatMode.FACTORIZED:
        sums = _factorized_sums(family, geom, config.workers)
        return UStatComponents(_normalize(family, n, sums), mode=mode)

    orders = KernelSet(family).orders
    budgets = tuple(config.budget(n, order) for order in orders)
    results = [
        _incomplete_ustat(j, family, geom, d, config.seed, config.workers)
        for j, d in zip(KERNELS, budgets, strict=True)
    ]
    values = tuple(r[0] for r in results)
    errors = tuple(r[1] for r in results)
    logger.debug(f"Incomplete U-statistics with budgets {budgets}: {values} +/- {errors}")
    return UStatComponents(values, errors, mode, budgets)  # type: ignore[arg-type]

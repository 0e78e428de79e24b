"""
Deterministische Arbeitsaufteilung
Feste Chunks, Thread-Pool mit geordnetem map, Reduktion in Chunk-Reihenfolge
"""

import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np

from metricsens.config import settings

T = TypeVar("T")
R = TypeVar("R")


def chunk_ranges(total: int, chunk_size: int | None = None) -> list[tuple[int, int]]:
    """Zerlegt [0, total) in feste, vom Worker-Count unabhängige Intervalle"""
    size = max(1, chunk_size or settings.chunk_size)
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def map_chunks(
    func: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int | None = None
) -> list[R]:
    """
    Wendet func auf alle Arbeitspakete an.

    Die Ergebnisliste hat immer die Reihenfolge der Eingabe, egal wie viele
    Worker laufen.
    """
    n_workers = workers if workers is not None else settings.workers
    items = list(items)
    if n_workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(func, items))


def fsum_columns(partials: Sequence[Sequence[float]]) -> list[float]:
    """Kompensierte Summe je Spalte über Chunk-Teilsummen"""
    if not partials:
        return []
    return [math.fsum(column) for column in zip(*partials, strict=True)]


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Counter-basierter Generator (Philox) für einen Teilstrom"""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(seq))

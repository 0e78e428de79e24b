"""
Instrumentierter Modell-Evaluator
Zählt Aufrufe, memoisiert je (Seed, Design) und wertet Zeilen-Chunks parallel aus
"""

from collections.abc import Callable
from typing import Any

import numpy as np
from loguru import logger

from metricsens.errors import EvaluationError
from metricsens.parallel import chunk_ranges, map_chunks


class ModelEvaluator:
    """Wrapper um die Black-Box f: Eingangsvektor -> Punkt im Ausgaberaum"""

    def __init__(
        self,
        func: Callable[[np.ndarray], Any],
        vectorized: bool = False,
        workers: int | None = None,
    ):
        self.func = func
        self.vectorized = vectorized
        self.workers = workers
        self.calls = 0
        self._memo: dict[tuple[int, str, int], np.ndarray] = {}

    def reset(self) -> None:
        self.calls = 0
        self._memo.clear()

    def evaluate(self, x: np.ndarray, seed: int, design: str) -> np.ndarray:
        """f auf allen Zeilen von x; gleiche (seed, design) kommen aus dem Cache"""
        key = (seed, design, x.shape[0])
        if key in self._memo:
            logger.debug(f"Reusing {len(self._memo[key])} memoized outputs for {key}")
            return self._memo[key]

        def run_chunk(bounds: tuple[int, int]) -> np.ndarray:
            return self._evaluate_rows(x, bounds, design)

        parts = map_chunks(run_chunk, chunk_ranges(x.shape[0]), self.workers)
        outputs = np.concatenate(parts, axis=0)
        self.calls += x.shape[0]
        self._memo[key] = outputs
        return outputs

    def _evaluate_rows(self, x: np.ndarray, bounds: tuple[int, int], design: str) -> np.ndarray:
        start, stop = bounds
        if self.vectorized:
            try:
                out = np.asarray(self.func(x[start:stop]), dtype=float)
            except Exception as e:
                raise EvaluationError(f"Evaluator failed on rows {start}..{stop - 1}: {e}", start, design) from e
            if out.shape[0] != stop - start:
                raise EvaluationError(
                    f"Vectorized evaluator returned {out.shape[0]} rows for {stop - start} inputs",
                    start,
                    design,
                )
        else:
            rows = []
            for i in range(start, stop):
                try:
                    rows.append(np.asarray(self.func(x[i]), dtype=float))
                except Exception as e:
                    raise EvaluationError(f"Evaluator failed: {e}", i, design) from e
            out = np.stack(rows, axis=0)

        finite = np.isfinite(out.reshape(out.shape[0], -1)).all(axis=1)
        if not finite.all():
            bad = start + int(np.argmin(finite))
            raise EvaluationError("Evaluator returned a non-finite output", bad, design)
        return out

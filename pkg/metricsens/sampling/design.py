"""
Pick-Freeze Designs
Eingangsmodell, Teilmengen u und gepaarte Stichproben (Z_i, Z_i^u)
"""

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger

from metricsens.errors import ConfigurationError
from metricsens.metricspace.spaces import MetricSpace, space_for_points
from metricsens.parallel import make_rng
from metricsens.sampling.distributions import Distribution, draw_uniforms
from metricsens.sampling.evaluator import ModelEvaluator

# Spawn-Keys der Teilströme
_STREAM_X = 0
_STREAM_X_PRIME = 1


@dataclass
class InputModel:
    """
    p unabhängige Eingänge und ein deterministischer Evaluator.

    Ohne blocks ist jede Koordinate ein eigener Eingang. Mit blocks bilden
    zusammenhängende Koordinaten einen vektorwertigen Eingang, der nur als
    Ganzes eingefroren wird.
    """

    name: str
    dists: list[Distribution]
    func: Callable[[np.ndarray], Any]
    names: list[str] | None = None
    blocks: list[tuple[int, ...]] | None = None
    vectorized: bool = False
    space: MetricSpace | None = None

    def __post_init__(self) -> None:
        if not self.dists:
            raise ConfigurationError(f"Model {self.name!r} needs at least one input")
        if self.blocks is None:
            self.blocks = [(j,) for j in range(len(self.dists))]
        covered = sorted(j for block in self.blocks for j in block)
        if covered != list(range(len(self.dists))):
            raise ConfigurationError(f"Blocks {self.blocks} must partition coordinates 0..{len(self.dists) - 1}")
        for block in self.blocks:
            if list(block) != list(range(block[0], block[0] + len(block))):
                raise ConfigurationError(f"Block {block} is not a contiguous coordinate range")
        if self.names is None:
            self.names = [f"X{i + 1}" for i in range(self.p)]
        if len(self.names) != self.p:
            raise ConfigurationError(f"Got {len(self.names)} input names for p={self.p} inputs")

    @property
    def p(self) -> int:
        return len(self.blocks or [])

    @property
    def dim(self) -> int:
        return len(self.dists)

    def evaluator(self, workers: int | None = None) -> ModelEvaluator:
        return ModelEvaluator(self.func, vectorized=self.vectorized, workers=workers)


@dataclass(frozen=True, order=True)
class SubsetU:
    """Nichtleere Teilmenge u von {1, ..., p} (1-basiert, sortiert)"""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise ConfigurationError("Subset u must be nonempty")
        if len(set(self.indices)) != len(self.indices):
            raise ConfigurationError(f"Subset u has duplicate indices: {self.indices}")
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in self.indices)))

    @classmethod
    def parse(cls, spec: Sequence[int | str] | int | str, model: InputModel) -> "SubsetU":
        """Aus 1-basierten Indizes oder Eingangsnamen"""
        items = [spec] if isinstance(spec, int | str) else list(spec)
        names = model.names or []
        indices = []
        for item in items:
            if isinstance(item, str) and not item.isdigit():
                if item not in names:
                    raise ConfigurationError(f"Unknown input {item!r}; model has {names}")
                indices.append(names.index(item) + 1)
            else:
                indices.append(int(item))
        subset = cls(tuple(indices))
        subset.validate(model.p)
        return subset

    def validate(self, p: int) -> None:
        bad = [i for i in self.indices if not 1 <= i <= p]
        if bad:
            raise ConfigurationError(f"Subset indices {bad} outside 1..{p}")

    def complement(self, p: int) -> tuple[int, ...]:
        return tuple(i for i in range(1, p + 1) if i not in self.indices)

    def is_full(self, p: int) -> bool:
        return len(self.indices) == p

    def coordinate_mask(self, model: InputModel) -> np.ndarray:
        mask = np.zeros(model.dim, dtype=bool)
        for i in self.indices:
            mask[list((model.blocks or [])[i - 1])] = True
        return mask

    def label(self, model: InputModel | None = None) -> str:
        if model is not None and model.names:
            return "{" + ",".join(model.names[i - 1] for i in self.indices) + "}"
        return "{" + ",".join(str(i) for i in self.indices) + "}"


@dataclass
class PairedSample:
    """N Zeilen (Z_i, Z_i^u) aus einem Pick-Freeze-Design"""

    z: np.ndarray
    zu: np.ndarray
    u: SubsetU
    seed: int
    model_name: str = ""
    x: np.ndarray | None = None
    xu: np.ndarray | None = None
    calls: int = 0
    space: MetricSpace | None = field(default=None)

    def __post_init__(self) -> None:
        if self.z.shape != self.zu.shape:
            raise ConfigurationError(f"Z and Z^u shapes differ: {self.z.shape} vs {self.zu.shape}")
        if self.space is None:
            self.space = space_for_points(self.z)

    @property
    def n(self) -> int:
        return int(self.z.shape[0])

    def resampled(self, rows: np.ndarray) -> "PairedSample":
        return PairedSample(self.z[rows], self.zu[rows], self.u, self.seed, self.model_name, space=self.space)


def sample_inputs(model: InputModel, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Zwei unabhängige N x d Matrizen (X, X') aus disjunkten Teilströmen"""
    if n < 1:
        raise ConfigurationError(f"Sample size must be >= 1, got {n}")
    matrices = []
    for stream in (_STREAM_X, _STREAM_X_PRIME):
        u = draw_uniforms(make_rng(seed, stream), (n, model.dim))
        cols = [np.asarray(dist.quantile(u[:, j]), dtype=float) for j, dist in enumerate(model.dists)]
        matrices.append(np.column_stack(cols))
    return matrices[0], matrices[1]


def freeze(x: np.ndarray, x_prime: np.ndarray, u: SubsetU, model: InputModel) -> np.ndarray:
    """X^u: Koordinaten aus u von X, Rest von X'"""
    return np.where(u.coordinate_mask(model)[None, :], x, x_prime)


def _check_design(model: InputModel, u: SubsetU, n: int, family_order: int) -> None:
    u.validate(model.p)
    if n < family_order + 2:
        raise ConfigurationError(f"Need N >= m+2 = {family_order + 2} rows, got {n}")
    if u.is_full(model.p):
        logger.warning(f"Subset {u.label(model)} freezes every input: Z == Z^u, index is 1")


def pick_freeze(
    model: InputModel,
    u: SubsetU,
    n: int,
    seed: int,
    evaluator: ModelEvaluator | None = None,
    family_order: int = 0,
) -> PairedSample:
    """Gepaarte Stichprobe mit genau 2N Aufrufen von f"""
    _check_design(model, u, n, family_order)
    evaluator = evaluator or model.evaluator()
    before = evaluator.calls

    x, x_prime = sample_inputs(model, n, seed)
    xu = freeze(x, x_prime, u, model)
    z = evaluator.evaluate(x, seed, design="x")
    zu = evaluator.evaluate(xu, seed, design=f"u={u.indices}")

    logger.info(f"Pick-Freeze design {model.name} u={u.label(model)} N={n} seed={seed}")
    return PairedSample(
        z, zu, u, seed, model.name, x, xu, calls=evaluator.calls - before, space=model.space
    )


def pick_freeze_shared(
    model: InputModel,
    subsets: Sequence[SubsetU],
    n: int,
    seed: int,
    evaluator: ModelEvaluator | None = None,
    family_order: int = 0,
) -> dict[SubsetU, PairedSample]:
    """
    Gemeinsames X für alle Teilmengen: N * (1 + |subsets|) Aufrufe statt 2N je u.
    """
    evaluator = evaluator or model.evaluator()
    x, x_prime = sample_inputs(model, n, seed)
    samples: dict[SubsetU, PairedSample] = {}
    for u in subsets:
        _check_design(model, u, n, family_order)
        before = evaluator.calls
        z = evaluator.evaluate(x, seed, design="x")
        xu = freeze(x, x_prime, u, model)
        zu = evaluator.evaluate(xu, seed, design=f"u={u.indices}")
        samples[u] = PairedSample(
            z, zu, u, seed, model.name, x, xu, calls=evaluator.calls - before, space=model.space
        )
    logger.info(
        f"Shared design {model.name}: {len(samples)} subsets, N={n}, {evaluator.calls} calls in total"
    )
    return samples


def export_sample_csv(sample: PairedSample, path: str | Path) -> Path:
    """Spalten x1..xd, x1'..xd' und eine Referenz auf die Ausgabezeile"""
    if sample.x is None or sample.xu is None:
        raise ConfigurationError("Sample carries no input matrices to export")
    d = sample.x.shape[1]
    frame = pd.DataFrame(sample.x, columns=[f"x{j + 1}" for j in range(d)])
    frame[[f"x{j + 1}'" for j in range(d)]] = sample.xu
    frame["output_ref"] = [f"{sample.model_name}:{sample.seed}:{i}" for i in range(sample.n)]
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path

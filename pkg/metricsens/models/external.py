"""
Externe Black-Box-Modelle
Zeilenprotokoll: je Eingangszeile eine Zeile auf stdin, je Ausgabe eine Zeile auf stdout
"""

import shlex
import subprocess
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from metricsens.errors import ConfigurationError, EvaluationError
from metricsens.metricspace.spaces import Grid, GridFieldSpace, MetricSpace, ScalarSpace, VectorSpace
from metricsens.sampling.design import InputModel
from metricsens.sampling.distributions import Distribution


@dataclass
class ExternalCommandModel:
    """
    Wertet f über ein externes Programm aus.

    Jede Ausgabezeile enthält den Punkt flach (Skalar, Vektor oder zeilenweise
    abgelegtes Feld), getrennt durch Leerzeichen.
    """

    command: list[str] | str
    output_shape: tuple[int, ...] = ()
    grid: Grid | None = None
    timeout: float | None = None
    argv: list[str] = field(init=False)

    def __post_init__(self) -> None:
        self.argv = shlex.split(self.command) if isinstance(self.command, str) else list(self.command)
        if not self.argv:
            raise ConfigurationError("External model command is empty")
        if self.grid is not None and self.output_shape != (self.grid.nx, self.grid.ny):
            raise ConfigurationError(f"Output shape {self.output_shape} does not match the grid")

    @property
    def space(self) -> MetricSpace:
        if self.grid is not None:
            return GridFieldSpace(self.grid)
        if not self.output_shape:
            return ScalarSpace()
        if len(self.output_shape) == 1:
            return VectorSpace(self.output_shape[0])
        raise ConfigurationError(f"Output shape {self.output_shape} needs a grid")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        stdin = "\n".join(" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(x)) + "\n"
        try:
            proc = subprocess.run(
                self.argv, input=stdin, capture_output=True, text=True, timeout=self.timeout, check=True
            )
        except (OSError, subprocess.SubprocessError) as e:
            logger.error(f"External model {self.argv[0]} failed: {e}")
            raise EvaluationError(f"External command {self.argv[0]!r} failed: {e}", 0, "external") from e

        lines = [line for line in proc.stdout.splitlines() if line.strip()]
        if len(lines) != len(x):
            raise EvaluationError(f"External command returned {len(lines)} rows for {len(x)} inputs", 0, "external")
        size = int(np.prod(self.output_shape)) if self.output_shape else 1
        out = np.empty((len(lines), size))
        for i, line in enumerate(lines):
            try:
                values = np.array(line.split(), dtype=float)
            except ValueError as e:
                raise EvaluationError(f"Unparsable output line {line[:40]!r}", i, "external") from e
            if values.size != size:
                raise EvaluationError(f"Expected {size} values per line, got {values.size}", i, "external")
            out[i] = values
        return out.reshape((len(lines), *self.output_shape))

    def input_model(
        self, name: str, dists: list[Distribution], names: list[str] | None = None
    ) -> InputModel:
        return InputModel(name=name, dists=dists, func=self, names=names, vectorized=True, space=self.space)

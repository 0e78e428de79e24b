"""
Lauf-Konfiguration
Versioniertes JSON-Dokument, validiert mit pydantic
"""

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from metricsens.baselines.pick_freeze import EstimatorKind
from metricsens.errors import ConfigurationError
from metricsens.inference.intervals import CIMethod
from metricsens.metricspace.families import FamilyKind
from metricsens.metricspace.spaces import Grid
from metricsens.sampling.distributions import Distribution, ScaledUniform, StandardNormal, Uniform
from metricsens.ustat_engine.ustatistics import UStatMode

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ==================== Verteilungen ====================


class UniformSpec(_Strict):
    kind: Literal["uniform"] = "uniform"
    low: float = 0.0
    high: float = 1.0

    def build(self) -> Distribution:
        return Uniform(self.low, self.high)


class NormalSpec(_Strict):
    kind: Literal["normal"] = "normal"

    def build(self) -> Distribution:
        return StandardNormal()


class ScaledUniformSpec(_Strict):
    kind: Literal["scaled_uniform"] = "scaled_uniform"
    factor: float
    low: float = 0.0
    high: float = 1.0

    def build(self) -> Distribution:
        return ScaledUniform(self.factor, self.low, self.high)


DistributionSpec = Annotated[UniformSpec | NormalSpec | ScaledUniformSpec, Field(discriminator="kind")]


class InputSpec(_Strict):
    name: str = Field(..., min_length=1)
    distribution: DistributionSpec


# ==================== Modelle ====================


class GridSpec(_Strict):
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = Field(..., ge=1)
    ny: int = Field(..., ge=1)

    def build(self) -> Grid:
        return Grid((self.x_min, self.x_max), (self.y_min, self.y_max), self.nx, self.ny)


class BuiltinModelSpec(_Strict):
    type: Literal["builtin"] = "builtin"
    name: Literal["lognormal", "plume", "plume_map"]
    height: float = Field(default=1.0, ge=0.0)  # nur plume
    grid: GridSpec | None = None


class ExternalModelSpec(_Strict):
    type: Literal["external"] = "external"
    name: str = "external"
    command: list[str] | str
    inputs: list[InputSpec] = Field(..., min_length=1)
    output_shape: list[int] = Field(default_factory=list)
    grid: GridSpec | None = None
    timeout: float | None = Field(default=None, gt=0)


ModelSpec = Annotated[BuiltinModelSpec | ExternalModelSpec, Field(discriminator="type")]


# ==================== Schätzung ====================


class UStatSpec(_Strict):
    mode: UStatMode = UStatMode.AUTO
    tuple_budget: int | None = Field(default=None, ge=1)
    center: bool = True


class IntervalSpec(_Strict):
    method: CIMethod = CIMethod.AUTO
    level: float = Field(default=0.95, gt=0.0, lt=1.0)
    projection_tuples: int | None = Field(default=None, ge=1)
    bootstrap_replicates: int | None = Field(default=None, ge=50)


class ConvergenceSpec(_Strict):
    budgets: list[int] | None = None
    budget_min: int = Field(default=100, ge=4)
    budget_max: int = Field(default=1_000_000, ge=4)
    points: int = Field(default=9, ge=1)
    replicates: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_grid(self) -> "ConvergenceSpec":
        if self.budgets is not None and not self.budgets:
            raise ValueError("budget grid must not be empty")
        if self.budgets is None and self.budget_min > self.budget_max:
            raise ValueError("budget_min must not exceed budget_max")
        return self

    def grid(self) -> list[int]:
        """Logarithmisch verteilte Budgets, aufsteigend und ohne Duplikate"""
        if self.budgets is not None:
            return sorted(set(self.budgets))
        values = np.geomspace(self.budget_min, self.budget_max, self.points)
        return sorted({int(round(v)) for v in values})


class MapSpec(_Strict):
    subsets: list[list[int | str]] | None = None
    estimator: EstimatorKind = EstimatorKind.GMS
    n: int = Field(default=500, ge=2)


class RunConfig(_Strict):
    schema_version: Literal[1] = SCHEMA_VERSION
    model: ModelSpec
    family: FamilyKind = FamilyKind.SOBOL_VALUE
    subsets: list[list[int | str]] | None = None  # None: alle Teilmengen erster Ordnung
    n: int | None = Field(default=None, ge=2)
    budget: int | None = Field(default=None, ge=4)
    shared_design: bool = False
    estimators: list[EstimatorKind] = Field(default_factory=lambda: [EstimatorKind.GMS], min_length=1)
    ustat: UStatSpec = Field(default_factory=UStatSpec)
    interval: IntervalSpec = Field(default_factory=IntervalSpec)
    seeds: list[Annotated[int, Field(ge=0)]] = Field(default_factory=lambda: [0], min_length=1)
    workers: int | None = Field(default=None, ge=1)
    convergence: ConvergenceSpec | None = None
    map: MapSpec | None = None
    out_dir: str = "results"

    @field_validator("subsets")
    @classmethod
    def _nonempty_subsets(cls, value: list[list[int | str]] | None) -> list[list[int | str]] | None:
        if value is not None and (not value or any(not s for s in value)):
            raise ValueError("subsets must be a nonempty list of nonempty subsets")
        return value

    @model_validator(mode="after")
    def _check_sizes(self) -> "RunConfig":
        if self.n is None and self.budget is None and self.convergence is None:
            raise ValueError("one of 'n', 'budget' or 'convergence' is required")
        if self.n is not None and self.budget is not None:
            raise ValueError("'n' and 'budget' are mutually exclusive")
        baselines = [e for e in self.estimators if e is not EstimatorKind.GMS]
        if baselines and self.family is not FamilyKind.SOBOL_VALUE:
            raise ValueError(f"estimators {[e.value for e in baselines]} need family 'sobol_value'")
        return self

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    def with_overrides(
        self, seed: int | None = None, workers: int | None = None, out_dir: str | None = None
    ) -> "RunConfig":
        update: dict[str, Any] = {}
        if seed is not None:
            update["seeds"] = [seed]
        if workers is not None:
            update["workers"] = workers
        if out_dir is not None:
            update["out_dir"] = out_dir
        return parse_run_config({**self.model_dump(mode="json"), **update}, "<overrides>") if update else self


def _format_validation_error(error: ValidationError) -> str:
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"  {loc}: {item['msg']}")
    return "\n".join(lines)


def parse_run_config(data: dict[str, Any], source: str = "<config>") -> RunConfig:
    # Ein RunReport trägt seine Konfiguration unter "config"
    if "config" in data and "model" not in data:
        data = data["config"]
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"{source}: invalid run config\n{_format_validation_error(e)}") from e


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a JSON object")
    return parse_run_config(data, str(path))

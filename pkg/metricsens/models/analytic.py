"""
Analytische Benchmark-Modelle
Eingangsmodell plus bekannte Referenzindizes
"""

from dataclasses import dataclass, field

from metricsens.errors import ConfigurationError
from metricsens.metricspace.families import FamilyKind
from metricsens.sampling.design import InputModel, SubsetU


@dataclass
class AnalyticModel:
    input_model: InputModel
    references: dict[tuple[tuple[int, ...], FamilyKind], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, value in self.references.items():
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"Reference index {key} = {value} outside [0, 1]")

    @property
    def name(self) -> str:
        return self.input_model.name

    @property
    def p(self) -> int:
        return self.input_model.p

    def reference(self, u: SubsetU, family: FamilyKind) -> float | None:
        return self.references.get((u.indices, family))

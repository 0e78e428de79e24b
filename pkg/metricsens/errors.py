"""
Fehlerhierarchie für metricsens
"""


class MetricSensError(Exception):
    """Basisklasse aller Fehler dieses Pakets"""


class ConfigurationError(MetricSensError):
    """Ungültige Verteilungs- oder Lauf-Konfiguration"""


class EvaluationError(MetricSensError):
    """Modellauswertung auf einem gezogenen Punkt fehlgeschlagen"""

    def __init__(self, message: str, row: int, design: str = ""):
        self.row = row
        self.design = design
        super().__init__(f"{message} (design={design or '?'}, row={row})")


class ShapeError(MetricSensError):
    """Punkte passen nicht zum Raum (Gitter / Dimensionen)"""


class UnsupportedOperationError(MetricSensError):
    """Operation im gewählten Raum nicht definiert (z.B. Mittelpunkt)"""


class ArityError(MetricSensError):
    """Falsche Tupel-Länge für einen Kernel"""


class TupleBudgetError(MetricSensError):
    """Exakte Enumeration würde das Tupel-Limit überschreiten"""


class DegenerateVarianceError(MetricSensError):
    """Nenner von Psi (nahezu) null: Ausgabe ist T-konstant"""


class DomainError(MetricSensError):
    """Argument außerhalb des Definitionsbereichs eines Modells"""


class BootstrapError(MetricSensError):
    """Zu viele degenerierte Bootstrap-Replikate"""


class IntervalError(MetricSensError):
    """Konfidenzintervall nicht berechenbar oder enthält den Schätzwert nicht"""

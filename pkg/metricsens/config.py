"""
Environment Configuration
Lädt Laufzeit-Parameter (Worker, Chunking, Budgets) aus Umgebung bzw. .env
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env", env_file_encoding="utf-8", env_prefix="METRICSENS_", extra="ignore"
    )

    # Parallelisierung
    workers: int = 1
    chunk_size: int = 256  # Zeilen bzw. Parameter-Tupel pro Arbeitspaket
    incomplete_chunk: int = 65536  # Tupel pro Arbeitspaket im incomplete-Modus

    # U-Statistiken
    exact_tuple_cap: int = 10_000_000
    incomplete_default_budget: int = 1_000_000
    denominator_rtol: float = 1e-12

    # Inferenz
    projection_tuples: int = 200
    projection_budget: int = 50_000_000  # Kernel-Auswertungen, darüber Bootstrap
    bootstrap_replicates: int = 500
    bootstrap_max_drop: float = 0.2

    # Plume-Gitter
    plume_x_min: float = 0.1
    plume_nx: int = 64
    plume_ny: int = 128

    # Logging
    log_level: str = "INFO"


settings = Settings()

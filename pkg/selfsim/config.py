"""Configuration management for the self-similar measure toolkit."""

from pathlib import Path
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit defaults loaded from environment variables (prefix SELFSIM_)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="SELFSIM_",
        case_sensitive=False,
        extra="ignore"
    )

    # Floating point
    rounding_eps: float = 1e-12  # Inflation applied to every certified endpoint

    # Dimension
    dimension_tol: float = 1e-13

    # Separation
    gap_rel_tol: float = 1e-9  # gap_tol = gap_rel_tol * diam(box)
    delta_shrink: float = 1e-9  # delta_lb = (1 - delta_shrink) * certified bound
    separation_depth_cap: int = 40
    separation_max_pairs: int = 2_000_000
    open_set_margin: float = 1e-12
    open_set_depth_cap: int = 60

    # Measure evaluation
    measure_tol: float = 1e-7
    measure_depth_cap: int = 60
    measure_leaf_budget: int = 4096
    tree_cache_nodes: int = 8192  # Largest cylinder level kept in memory per system

    # Optimizers
    packing_eps: float = 1e-3
    max_cells: int = 200_000  # pybnb node limit per search
    full_window_levels: int = 1

    # Sampling budgets
    sample_cap: int = 2 ** 20
    scan_budget: int = 1_000_000

    # Continuity lab
    perturb_retries: int = 8
    sweep_delta_fraction: float = 0.5

    # Workers
    threads: int = 1

    # Storage
    database_url: str = "sqlite:///./selfsim.db"
    persist_runs: bool = False

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @property
    def log_dir(self) -> Optional[Path]:
        """Get log directory as Path object."""
        return Path(self.log_file).parent if self.log_file else None


# Global settings instance
settings = Settings()

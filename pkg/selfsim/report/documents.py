"""Run configuration and machine-readable result documents."""

import logging
import platform
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, FilePath, ValidationError, field_validator, model_validator

from selfsim import __version__
from selfsim.errors import ParameterError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

COMMANDS = ("dim", "certify", "packing", "hausdorff1d", "hausdorff-balls", "scan", "verify", "sweep")
SEEDED_COMMANDS = ("verify", "sweep")


class RunConfig(BaseModel):
    """Validated parameters of one command (flags > YAML file > settings)."""

    model_config = ConfigDict(extra="forbid")

    command: Literal[COMMANDS]
    ifs_path: FilePath
    eps: Optional[float] = Field(default=None, gt=0)
    tol: Optional[float] = Field(default=None, gt=0)
    depth_cap: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    samples: int = Field(default=200, ge=0)
    blowup_cases: int = Field(default=100, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None
    csv: Optional[Path] = None
    window: Literal["compact", "full"] = "compact"
    magnitudes: Optional[list[float]] = None
    trials: int = Field(default=5, ge=0)
    mode: Literal["translations", "ratios", "both"] = "translations"
    include_hausdorff: bool = False
    radii: Optional[list[float]] = None
    center_depth: int = Field(default=4, ge=0)
    store: bool = False

    @model_validator(mode="after")
    def _check_consistency(self) -> "RunConfig":
        if self.command in SEEDED_COMMANDS and self.seed is None:
            raise ValueError(f"'{self.command}' draws random samples and needs a seed")
        for name in ("magnitudes", "radii"):
            values = getattr(self, name)
            if values is not None and any(v <= 0 for v in values):
                raise ValueError(f"All {name} must be positive")
        for name in ("out", "csv"):
            path = getattr(self, name)
            if path is not None and not path.parent.exists():
                raise ValueError(f"Output directory {path.parent} does not exist")
        return self


def load_run_config(flags: dict[str, Any], config_file: Optional[Union[str, Path]] = None) -> RunConfig:
    """Merge YAML file values under command-line flags and validate.

    Flags left at None do not override the file.

    Raises:
        ParameterError: If the file is unreadable or the merged parameters are invalid
    """
    merged: dict[str, Any] = {}
    if config_file is not None:
        try:
            loaded = yaml.safe_load(Path(config_file).read_text()) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ParameterError(f"Cannot read run config {config_file}: {e}") from e
        if not isinstance(loaded, dict):
            raise ParameterError(f"Run config {config_file} must be a mapping")
        merged.update({key.replace("-", "_"): value for key, value in loaded.items()})
    merged.update({key: value for key, value in flags.items() if value is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ParameterError(f"Invalid run configuration: {e}") from e


class ResultDocument(BaseModel):
    """JSON document emitted by every command.

    Everything except `meta` is a deterministic function of the inputs.
    """

    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = SCHEMA_VERSION
    command: str
    ifs_hash: str
    s: Optional[float] = None
    cert: Optional[dict[str, Any]] = None
    result: dict[str, Any] = Field(default_factory=dict)
    meta: dict[str, Any] = Field(default_factory=dict)

    @field_validator("cert", "result", "meta", mode="before")
    @classmethod
    def _to_plain(cls, value: Any) -> Any:
        return _plain(value)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def deterministic_json(self) -> str:
        return self.model_dump_json(indent=2, exclude={"meta"})

    @classmethod
    def from_json(cls, text: Union[str, bytes]) -> "ResultDocument":
        return cls.model_validate_json(text)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n")
        logger.info(f"Wrote {self.command} result to {path}")


def _plain(value: Any) -> Any:
    """numpy scalars and arrays as plain Python values, recursively."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def build_meta(started: datetime, threads: int, **extra: Any) -> dict[str, Any]:
    """Wall-clock and host data, kept apart from the deterministic fields."""
    finished = datetime.now(timezone.utc)
    meta = {
        "started_at": started.isoformat(),
        "elapsed_s": (finished - started).total_seconds(),
        "host": platform.node(),
        "python": platform.python_version(),
        "version": __version__,
        "threads": threads,
    }
    meta.update(extra)
    return meta

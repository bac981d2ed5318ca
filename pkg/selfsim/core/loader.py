"""Read, validate and write IFS description files (JSON)."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from selfsim.core.ifs import IFS
from selfsim.core.similitude import Similitude, rotation_from_angle
from selfsim.errors import DomainError, IFSValidationError

logger = logging.getLogger(__name__)


class MapSpec(BaseModel):
    """One similitude; at most one of rotation / angle / sign may be given."""

    model_config = ConfigDict(extra="forbid")

    ratio: float = Field(gt=0.0, lt=1.0)
    translation: list[float]
    rotation: Optional[list[list[float]]] = None
    angle: Optional[float] = None
    sign: Optional[int] = None

    @model_validator(mode="after")
    def _one_orientation(self) -> "MapSpec":
        given = [name for name in ("rotation", "angle", "sign") if getattr(self, name) is not None]
        if len(given) > 1:
            raise ValueError(f"Give at most one of rotation/angle/sign, got {given}")
        if self.sign is not None and self.sign not in (-1, 1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        return self

    def orientation(self, dim: int) -> np.ndarray:
        if self.rotation is not None:
            return np.array(self.rotation, dtype=float)
        if self.angle is not None:
            if dim != 2:
                raise ValueError("angle is only accepted for 2-dimensional systems")
            return rotation_from_angle(self.angle)
        if self.sign is not None:
            if dim != 1:
                raise ValueError("sign is only accepted for 1-dimensional systems")
            return np.array([[float(self.sign)]])
        return np.eye(dim)


class BoxSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lo: list[float]
    hi: list[float]


class IFSFile(BaseModel):
    """Schema of an IFS description file."""

    model_config = ConfigDict(extra="forbid")

    dim: int = Field(ge=1)
    maps: list[MapSpec] = Field(min_length=2)
    box: BoxSpec
    name: Optional[str] = None

    @model_validator(mode="after")
    def _dimensions_agree(self) -> "IFSFile":
        for index, entry in enumerate(self.maps, start=1):
            if len(entry.translation) != self.dim:
                raise ValueError(f"Map {index}: translation needs {self.dim} coordinates")
        if len(self.box.lo) != self.dim or len(self.box.hi) != self.dim:
            raise ValueError(f"Box corners need {self.dim} coordinates")
        return self

    def build(self) -> IFS:
        try:
            maps = tuple(
                Similitude(entry.ratio, entry.orientation(self.dim), entry.translation)
                for entry in self.maps
            )
        except ValueError as e:
            raise IFSValidationError(str(e)) from e
        return IFS(maps, self.box.lo, self.box.hi)


def parse_ifs(data: Union[str, bytes, dict]) -> IFS:
    """Build an IFS from JSON text or an already decoded dict.

    Raises:
        IFSValidationError: If the document is malformed or violates an IFS invariant
    """
    try:
        if isinstance(data, dict):
            parsed = IFSFile.model_validate(data)
        else:
            parsed = IFSFile.model_validate_json(data)
    except ValidationError as e:
        raise IFSValidationError(f"Invalid IFS description: {e}") from e
    try:
        return parsed.build()
    except DomainError as e:
        raise IFSValidationError(str(e)) from e


def load_ifs(path: Union[str, Path]) -> IFS:
    """Load an IFS description file."""
    path = Path(path)
    if not path.exists():
        raise IFSValidationError(f"IFS file not found: {path}")
    logger.info(f"Loading IFS from {path}")
    ifs = parse_ifs(path.read_text(encoding="utf-8"))
    logger.info(f"Loaded {ifs}")
    return ifs


def dump_ifs(ifs: IFS, path: Optional[Union[str, Path]] = None) -> str:
    """Serialize to the description-file schema; also write it when a path is given."""
    text = json.dumps(ifs.to_dict(), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def ifs_hash(ifs: IFS) -> str:
    """SHA256 of the canonical JSON form of the system."""
    canonical = json.dumps(ifs.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

"""Similitudes of R^d, closed balls and words over {1..N}."""

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import itertools
import math

import numpy as np

from selfsim.errors import DomainError, InvalidWordError

ORTHOGONALITY_TOL = 1e-12

# Letters are 1-based, as in the usual symbolic notation W_k = {1..N}^k.
Word = tuple[int, ...]


def _as_vector(values, name: str) -> np.ndarray:
    vec = np.array(values, dtype=float).reshape(-1)
    if vec.size == 0:
        raise DomainError(f"{name} must have at least one coordinate")
    vec.setflags(write=False)
    return vec


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball B(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius >= 0:
            raise DomainError(f"Ball radius must be nonnegative, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains_ball(self, other: "Ball", slack: float = 0.0) -> bool:
        """True if `other` lies inside this ball inflated by `slack`."""
        gap = float(np.linalg.norm(other.center - self.center))
        return gap + other.radius <= self.radius + slack

    def contains_point(self, point, slack: float = 0.0) -> bool:
        return float(np.linalg.norm(np.asarray(point, dtype=float) - self.center)) <= self.radius + slack

    def with_radius(self, radius: float) -> "Ball":
        return Ball(self.center, radius)

    def interval(self) -> tuple[float, float]:
        """The ball as an interval (d = 1 only)."""
        if self.dim != 1:
            raise DomainError("interval() is only defined for 1-dimensional balls")
        c = float(self.center[0])
        return c - self.radius, c + self.radius

    @classmethod
    def from_interval(cls, a: float, b: float) -> "Ball":
        if not a < b:
            raise DomainError(f"Interval endpoints must satisfy a < b, got [{a}, {b}]")
        return cls(np.array([(a + b) / 2.0]), (b - a) / 2.0)

    def to_dict(self) -> dict:
        return {"center": [float(v) for v in self.center], "radius": self.radius}

    def __repr__(self) -> str:
        return f"Ball(center={self.center.tolist()}, radius={self.radius:.6g})"


def rotation_from_angle(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class Similitude:
    """The map f(x) = ratio * rotation @ x + translation."""

    ratio: float
    rotation: np.ndarray
    translation: np.ndarray
    # Only f_∅ = id has ratio 1
    allow_identity: bool = field(default=False, repr=False)

    def __post_init__(self):
        translation = _as_vector(self.translation, "translation")
        d = translation.size
        rotation = np.array(self.rotation, dtype=float)
        if rotation.ndim == 0:
            rotation = rotation.reshape(1, 1)
        if rotation.shape != (d, d):
            raise DomainError(f"Rotation must be {d}x{d}, got shape {rotation.shape}")
        if np.max(np.abs(rotation.T @ rotation - np.eye(d))) > ORTHOGONALITY_TOL:
            raise DomainError("Rotation matrix is not orthogonal")
        rotation.setflags(write=False)
        ratio = float(self.ratio)
        upper_ok = ratio <= 1.0 if self.allow_identity else ratio < 1.0
        if not (ratio > 0.0 and upper_ok):
            raise DomainError(f"Contraction ratio must lie in (0, 1), got {ratio}")
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls, dim: int) -> "Similitude":
        return cls(1.0, np.eye(dim), np.zeros(dim), allow_identity=True)

    @classmethod
    def from_angle(cls, ratio: float, angle: float, translation: Sequence[float]) -> "Similitude":
        return cls(ratio, rotation_from_angle(angle), translation)

    @property
    def dim(self) -> int:
        return self.translation.size

    def __call__(self, x) -> np.ndarray:
        return self.ratio * (self.rotation @ np.asarray(x, dtype=float)) + self.translation

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        """Apply the map to an (M, d) array of points."""
        return self.ratio * (np.asarray(points, dtype=float) @ self.rotation.T) + self.translation

    def compose(self, inner: "Similitude") -> "Similitude":
        """Return self o inner."""
        return Similitude(
            self.ratio * inner.ratio,
            self.rotation @ inner.rotation,
            self.ratio * (self.rotation @ inner.translation) + self.translation,
            allow_identity=True,
        )

    def inverse_apply(self, y) -> np.ndarray:
        """Apply f^{-1}(y) = rotation^T (y - translation) / ratio."""
        return self.rotation.T @ (np.asarray(y, dtype=float) - self.translation) / self.ratio

    def apply_ball(self, ball: Ball) -> Ball:
        return Ball(self(ball.center), self.ratio * ball.radius)

    def inverse_ball(self, ball: Ball) -> Ball:
        return Ball(self.inverse_apply(ball.center), ball.radius / self.ratio)

    def fixed_point(self) -> np.ndarray:
        """Solve f(c) = c, i.e. (I - ratio * rotation) c = translation."""
        d = self.dim
        return np.linalg.solve(np.eye(d) - self.ratio * self.rotation, self.translation)

    def to_dict(self) -> dict:
        data = {"ratio": self.ratio, "translation": [float(v) for v in self.translation]}
        if self.dim == 1:
            data["sign"] = int(round(float(self.rotation[0, 0])))
        elif not np.allclose(self.rotation, np.eye(self.dim)):
            data["rotation"] = self.rotation.tolist()
        return data

    def __repr__(self) -> str:
        return (f"Similitude(ratio={self.ratio:.6g}, rotation={self.rotation.tolist()}, "
                f"translation={self.translation.tolist()})")


def validate_word(word: Iterable[int], n_maps: int) -> Word:
    """Return the word as a tuple, raising InvalidWordError on a bad letter."""
    letters = tuple(int(letter) for letter in word)
    for letter in letters:
        if not 1 <= letter <= n_maps:
            raise InvalidWordError(f"Letter {letter} is outside 1..{n_maps}")
    return letters


def iter_words(n_maps: int, depth: int) -> Iterator[Word]:
    """Enumerate W_depth lexicographically (depth-first order)."""
    if depth < 0:
        raise DomainError(f"Word length must be nonnegative, got {depth}")
    return itertools.product(range(1, n_maps + 1), repeat=depth)


def parse_word(text: str) -> Word:
    """Parse '2,1' or '21' (single-digit letters) into a word."""
    text = text.strip()
    if not text or text in ("-", "empty"):
        return ()
    if "," in text:
        return tuple(int(part) for part in text.split(","))
    return tuple(int(ch) for ch in text)

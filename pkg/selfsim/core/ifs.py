"""Iterated function systems of similitudes and their cylinders."""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from selfsim.config import settings
from selfsim.core.similitude import Ball, Similitude, Word, validate_word
from selfsim.errors import (
    BudgetExceededError,
    DomainError,
    IFSValidationError,
    IncompatibleSystemsError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IFS:
    """A finite system {f_1, ..., f_N} of contractive similitudes on the box X."""

    maps: tuple[Similitude, ...]
    box_lo: np.ndarray
    box_hi: np.ndarray

    def __post_init__(self):
        maps = tuple(self.maps)
        if len(maps) < 2:
            raise IFSValidationError(f"An IFS needs at least 2 maps, got {len(maps)}")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise IFSValidationError(f"All maps must act on the same space, got dimensions {sorted(dims)}")
        d = dims.pop()
        lo = np.array(self.box_lo, dtype=float).reshape(-1)
        hi = np.array(self.box_hi, dtype=float).reshape(-1)
        if lo.size != d or hi.size != d:
            raise IFSValidationError(f"Ambient box must have {d} coordinates")
        if np.any(lo >= hi):
            raise IFSValidationError("Ambient box must satisfy lo < hi in every coordinate")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "box_lo", lo)
        object.__setattr__(self, "box_hi", hi)

        slack = self.rounding_pad
        corners = self.box_corners
        for index, f in enumerate(maps, start=1):
            images = f.apply_many(corners)
            if np.any(images < lo - slack) or np.any(images > hi + slack):
                raise IFSValidationError(f"Map {index} does not send the ambient box into itself")

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @cached_property
    def ratios(self) -> np.ndarray:
        return np.array([m.ratio for m in self.maps])

    @property
    def r_star(self) -> float:
        return float(self.ratios.min())

    @property
    def r_max(self) -> float:
        return float(self.ratios.max())

    @cached_property
    def box_corners(self) -> np.ndarray:
        """All 2^d corners of the ambient box, shape (2^d, d)."""
        d = self.box_lo.size
        bits = (np.arange(2 ** d)[:, None] >> np.arange(d)[None, :]) & 1
        return np.where(bits == 1, self.box_hi, self.box_lo)

    @property
    def box_diam(self) -> float:
        return float(np.linalg.norm(self.box_hi - self.box_lo))

    @property
    def rounding_pad(self) -> float:
        """Outward inflation for certified lengths: rounding_eps at the scale of the box."""
        scale = max(1.0, float(np.max(np.abs(np.concatenate([self.box_lo, self.box_hi])))), self.box_diam)
        return settings.rounding_eps * scale

    # ------------------------------------------------------------------
    # Geometry shared by every cylinder computation
    # ------------------------------------------------------------------

    @cached_property
    def root_point(self) -> np.ndarray:
        """p_0, the fixed point of f_1; it lies in K."""
        return self.maps[0].fixed_point()

    @cached_property
    def root_ball(self) -> Ball:
        return invariant_ball(self)

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(ratios (N,), rotations (N,d,d), translations (N,d)) for vectorised code."""
        return (
            self.ratios,
            np.stack([m.rotation for m in self.maps]),
            np.stack([m.translation for m in self.maps]),
        )

    # ------------------------------------------------------------------
    # Derived systems
    # ------------------------------------------------------------------

    def with_maps(self, maps: Sequence[Similitude]) -> "IFS":
        return IFS(tuple(maps), self.box_lo, self.box_hi)

    def conjugate(self, scale: float, shift: Optional[Sequence[float]] = None) -> "IFS":
        """Conjugate by phi(x) = scale * x + shift; the attractor becomes phi(K)."""
        if scale <= 0:
            raise DomainError(f"Conjugation scale must be positive, got {scale}")
        b = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        maps = [
            Similitude(m.ratio, m.rotation, scale * m.translation + b - m.ratio * (m.rotation @ b))
            for m in self.maps
        ]
        return IFS(tuple(maps), scale * self.box_lo + b, scale * self.box_hi + b)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "maps": [m.to_dict() for m in self.maps],
            "box": {"lo": self.box_lo.tolist(), "hi": self.box_hi.tolist()},
        }

    def __repr__(self) -> str:
        return f"IFS(N={self.n_maps}, d={self.dim}, ratios={self.ratios.round(6).tolist()})"


@dataclass(frozen=True, eq=False)
class CylinderNode:
    """The cylinder K_w: its word, composed map, certified hull ball and weight r_w^s."""

    word: Word
    map: Similitude
    hull: Ball
    weight: float

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def point(self) -> np.ndarray:
        """f_w(p_0), a point of K_w."""
        return self.hull.center

    def children(self, ifs: IFS, s: float) -> list["CylinderNode"]:
        return [cylinder(ifs, self.word + (j,), s) for j in range(1, ifs.n_maps + 1)]


def compose(ifs: IFS, word: Iterable[int]) -> Similitude:
    """Return f_w = f_{i1} o f_{i2} o ... o f_{ik}; the empty word gives the identity.

    Raises:
        InvalidWordError: If a letter is outside 1..N
    """
    letters = validate_word(word, ifs.n_maps)
    result = Similitude.identity(ifs.dim)
    for letter in letters:
        result = result.compose(ifs.maps[letter - 1])
    return result


def invariant_ball(ifs: IFS) -> Ball:
    """Root ball B_0 = B(c_0, R_0) with f_i(B_0) inside B_0 for every i.

    c_0 is the fixed point of f_1 and R_0 = max_i |f_i(c_0) - c_0| / (1 - r_i);
    then |f_i(y) - c_0| <= r_i R_0 + (1 - r_i) R_0 = R_0 for y in B_0, so K lies in B_0.
    """
    c0 = ifs.maps[0].fixed_point()
    radius = max(
        float(np.linalg.norm(f(c0) - c0)) / (1.0 - f.ratio) for f in ifs.maps
    )
    radius = radius * (1.0 + settings.rounding_eps) + settings.rounding_eps
    return Ball(c0, radius)


def cylinder(ifs: IFS, word: Iterable[int], s: float) -> CylinderNode:
    """Build the cylinder node for `word`: hull f_w(B_0) and weight r_w^s."""
    if not s > 0:
        raise DomainError(f"Dimension s must be positive, got {s}")
    letters = validate_word(word, ifs.n_maps)
    f_w = compose(ifs, letters)
    root = ifs.root_ball
    return CylinderNode(
        word=letters,
        map=f_w,
        hull=Ball(f_w(root.center), f_w.ratio * root.radius),
        weight=f_w.ratio ** s,
    )


def ifs_distance(f: IFS, g: IFS) -> float:
    """D(f, g) = max_i sup_{x in X} |f_i(x) - g_i(x)|.

    f_i - g_i is affine and the norm is convex, so the sup over the box is
    reached at one of its 2^d corners.

    Raises:
        IncompatibleSystemsError: If the systems differ in N, d or ambient box
    """
    if f.n_maps != g.n_maps or f.dim != g.dim:
        raise IncompatibleSystemsError(
            f"Cannot compare systems with (N, d) = ({f.n_maps}, {f.dim}) and ({g.n_maps}, {g.dim})"
        )
    if not (np.array_equal(f.box_lo, g.box_lo) and np.array_equal(f.box_hi, g.box_hi)):
        raise IncompatibleSystemsError("Systems live on different ambient boxes")
    corners = f.box_corners
    distance = 0.0
    for fi, gi in zip(f.maps, g.maps):
        gaps = np.linalg.norm(fi.apply_many(corners) - gi.apply_many(corners), axis=1)
        distance = max(distance, float(gaps.max()))
    return distance


def attractor_sample(ifs: IFS, depth: int, cap: Optional[int] = None) -> np.ndarray:
    """Return {f_w(p_0) : w in W_depth} as an (N^depth, d) array in lexicographic word order.

    Raises:
        BudgetExceededError: If N^depth exceeds the sample cap
    """
    if depth < 0:
        raise DomainError(f"Sample depth must be nonnegative, got {depth}")
    cap = settings.sample_cap if cap is None else cap
    if ifs.n_maps ** depth > cap:
        raise BudgetExceededError(
            f"{ifs.n_maps}^{depth} sample points exceed the cap of {cap}"
        )
    points = ifs.root_point.reshape(1, -1)
    for _ in range(depth):
        points = np.concatenate([f.apply_many(points) for f in ifs.maps], axis=0)
    return points


def hull_interval(ifs: IFS, max_iter: int = 500) -> tuple[float, float]:
    """Convex hull [m, M] of K for d = 1.

    Iterates J -> conv(f_1(J) u ... u f_N(J)) from the invariant ball; each iterate
    still contains K and the sequence converges to conv(K).
    """
    if ifs.dim != 1:
        raise DomainError("hull_interval is only defined for 1-dimensional systems")
    a, b = ifs.root_ball.interval()
    scales = np.array([m.ratio * m.rotation[0, 0] for m in ifs.maps])
    shifts = np.array([m.translation[0] for m in ifs.maps])
    for _ in range(max_iter):
        images = np.concatenate([scales * a + shifts, scales * b + shifts])
        new_a, new_b = float(images.min()), float(images.max())
        done = abs(new_a - a) <= settings.rounding_eps and abs(new_b - b) <= settings.rounding_eps
        a, b = new_a, new_b
        if done:
            break
    pad = settings.rounding_eps * max(1.0, abs(a), abs(b))
    return a - pad, b + pad

"""Vectorised cylinder frontiers.

A frontier is a set of cylinders K_w kept as parallel numpy arrays (composed map,
hull ball, weight, depth). Branch-and-bound code classifies a whole frontier at
once and expands the undecided part, instead of walking the tree node by node.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS, CylinderNode, cylinder

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Frontier:
    """Parallel arrays describing M cylinders of one system."""

    ratio: np.ndarray  # (M,)
    rotation: np.ndarray  # (M, d, d)
    translation: np.ndarray  # (M, d)
    center: np.ndarray  # (M, d) hull centers f_w(c_0), points of K
    radius: np.ndarray  # (M,) hull radii r_w * R_0
    weight: np.ndarray  # (M,) r_w^s
    depth: np.ndarray  # (M,) word lengths

    @property
    def size(self) -> int:
        return int(self.ratio.size)

    def __len__(self) -> int:
        return self.size

    def take(self, index) -> "Frontier":
        return Frontier(
            self.ratio[index], self.rotation[index], self.translation[index],
            self.center[index], self.radius[index], self.weight[index], self.depth[index],
        )

    @staticmethod
    def concat(parts: list["Frontier"]) -> "Frontier":
        parts = [p for p in parts if p.size] or parts[:1]
        return Frontier(*(np.concatenate([getattr(p, name) for p in parts]) for name in Frontier._fields()))

    @staticmethod
    def _fields() -> tuple[str, ...]:
        return ("ratio", "rotation", "translation", "center", "radius", "weight", "depth")


class CylinderTree:
    """Expansion rules for the cylinders of one system at dimension s.

    Levels are cached up to the largest level with at most `tree_cache_nodes`
    cylinders so that repeated queries skip the coarse part of the tree.
    """

    def __init__(self, ifs: IFS, s: float, cache_nodes: Optional[int] = None):
        self.ifs = ifs
        self.s = float(s)
        self.root_ball = ifs.root_ball
        self._ratios, self._rotations, self._translations = ifs.stacked()
        self._anchors = np.stack([f(self.root_ball.center) for f in ifs.maps])  # f_j(c_0)
        self._weights = self._ratios ** self.s
        self.weight_band = float(self._weights.min())

        cap = settings.tree_cache_nodes if cache_nodes is None else cache_nodes
        self._levels = [self.root()]
        while self._levels[-1].size * ifs.n_maps <= cap:
            self._levels.append(self.expand(self._levels[-1]))
        logger.debug(f"Cached {len(self._levels)} cylinder levels for {ifs} (s={self.s:.6g})")

    @property
    def cached_depth(self) -> int:
        return len(self._levels) - 1

    def level(self, depth: int) -> Frontier:
        """All cylinders of W_depth (must not exceed the cached depth)."""
        return self._levels[depth]

    def root(self) -> Frontier:
        return self.from_nodes([cylinder(self.ifs, (), self.s)])

    def from_nodes(self, nodes: list[CylinderNode]) -> Frontier:
        return Frontier(
            ratio=np.array([n.map.ratio for n in nodes]),
            rotation=np.stack([n.map.rotation for n in nodes]),
            translation=np.stack([n.map.translation for n in nodes]),
            center=np.stack([n.hull.center for n in nodes]),
            radius=np.array([n.hull.radius for n in nodes]),
            weight=np.array([n.weight for n in nodes]),
            depth=np.array([n.depth for n in nodes], dtype=np.int64),
        )

    def expand(self, frontier: Frontier) -> Frontier:
        """Replace every cylinder K_w by its N children K_{w1}, ..., K_{wN} (node-major order)."""
        m, n, d = frontier.size, self.ifs.n_maps, self.ifs.dim
        ratio = frontier.ratio[:, None] * self._ratios[None, :]
        rotation = np.einsum("mab,nbc->mnac", frontier.rotation, self._rotations)
        # f_w o f_j has translation r_w O_w t_j + t_w and maps c_0 to f_w(f_j(c_0))
        translation = (frontier.ratio[:, None, None]
                       * np.einsum("mab,nb->mna", frontier.rotation, self._translations)
                       + frontier.translation[:, None, :])
        center = (frontier.ratio[:, None, None]
                  * np.einsum("mab,nb->mna", frontier.rotation, self._anchors)
                  + frontier.translation[:, None, :])
        return Frontier(
            ratio=ratio.reshape(m * n),
            rotation=rotation.reshape(m * n, d, d),
            translation=translation.reshape(m * n, d),
            center=center.reshape(m * n, d),
            radius=ratio.reshape(m * n) * self.root_ball.radius,
            weight=(frontier.weight[:, None] * self._weights[None, :]).reshape(m * n),
            depth=np.repeat(frontier.depth + 1, n),
        )


@lru_cache(maxsize=64)
def cylinder_tree(ifs: IFS, s: float) -> CylinderTree:
    """Shared tree per (system, s); systems hash by identity."""
    return CylinderTree(ifs, s)

"""Set metrics: hull diameters, support-sampled Hausdorff distance, gap bounds."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import czono
from .czono import Box, ConstrainedZonotope


@dataclass(frozen=True)
class DirectionGrid:
    """Unit directions used to sample support functions.

    In 2-D the directions are evenly spaced angles; in other dimensions they
    are seeded uniform samples on the sphere. In 1-D the grid is ``{+1, -1}``.
    """

    directions: np.ndarray

    @property
    def dimension(self) -> int:
        return self.directions.shape[1]

    @property
    def count(self) -> int:
        return self.directions.shape[0]

    @classmethod
    def for_dim(cls, n: int, count: int | None = None, seed: int = 0) -> "DirectionGrid":
        if n == 1:
            return cls(np.array([[1.0], [-1.0]]))
        if n == 2:
            count = 720 if count is None else count
            th = 2 * np.pi * np.arange(count) / count
            return cls(np.column_stack([np.cos(th), np.sin(th)]))
        count = 512 if count is None else count
        D = np.random.default_rng(seed).standard_normal((count, n))
        return cls(D / np.linalg.norm(D, axis=1, keepdims=True))

    def refined(self, factor: int = 2) -> "DirectionGrid":
        """A grid containing this one (extra samples appended)."""
        n = self.dimension
        if n == 2:
            th = 2 * np.pi * np.arange(self.count * factor) / (self.count * factor)
            return DirectionGrid(np.column_stack([np.cos(th), np.sin(th)]))
        if n == 1:
            return self
        extra = DirectionGrid.for_dim(n, self.count * (factor - 1), seed=self.count).directions
        return DirectionGrid(np.vstack([self.directions, extra]))


def _bounded_support(Z: ConstrainedZonotope, D: np.ndarray) -> np.ndarray:
    h = czono.support_many(Z, D)
    if np.any(np.isneginf(h)):
        raise czono.EmptySetError("support of an empty set")
    if np.any(np.isposinf(h)):
        raise ValueError("set is unbounded; Hausdorff distance undefined")
    return h


def support_profile(Z: ConstrainedZonotope, grid: DirectionGrid) -> np.ndarray:
    """Support values of a nonempty bounded set on every grid direction."""
    return _bounded_support(Z, grid.directions)


def hausdorff_lower(Z1: ConstrainedZonotope, Z2: ConstrainedZonotope, grid: DirectionGrid | None = None) -> float:
    """Largest support-function difference over the grid, a lower bound on d_H."""
    grid = DirectionGrid.for_dim(Z1.dim) if grid is None else grid
    D = grid.directions
    return float(np.max(np.abs(_bounded_support(Z1, D) - _bounded_support(Z2, D))))


def _hull(Z) -> Box:
    hull = Z if isinstance(Z, Box) else czono.interval_hull(Z)
    if not hull.bounded:
        raise ValueError("set is unbounded")
    return hull


def gap_bound_to_state(Z, x_true) -> tuple[float, bool]:
    """Largest distance from ``x_true`` to a face hyperplane of the interval hull.

    Returns the bound and whether ``x_true`` lies in the hull.
    """
    hull = _hull(Z)
    x = np.asarray(x_true, dtype=float)
    dist = np.concatenate([np.abs(x - hull.lower), np.abs(hull.upper - x)])
    inside = bool(np.all(x >= hull.lower - 1e-9) and np.all(x <= hull.upper + 1e-9))
    return float(np.max(dist, initial=0.0)), inside


def diameter_hull(Z) -> float:
    return float(2 * np.linalg.norm(_hull(Z).half_widths))


def diameter_inf_hull(Z) -> float:
    return float(2 * np.max(_hull(Z).half_widths, initial=0.0))


def diameter_width(Z: ConstrainedZonotope, grid: DirectionGrid | None = None, ascent_steps: int = 50) -> float:
    """Euclidean diameter of a bounded set as its largest directional width.

    Each of the best few grid directions is polished by the update
    ``d <- (x - y) / |x - y|`` with ``x``, ``y`` the support points in ``d`` and
    ``-d``; the width never decreases along it. The result is attained by a
    pair of points of ``Z``, hence a lower bound on the diameter, and in
    practice equal to it.
    """
    grid = DirectionGrid.for_dim(Z.dim) if grid is None else grid
    D = grid.directions
    hp, xp = czono.support_points(Z, D)
    hm, xm = czono.support_points(Z, -D)
    if not (np.all(np.isfinite(hp)) and np.all(np.isfinite(hm))):
        raise ValueError("set is unbounded")
    best = 0.0
    for i in np.argsort(hp + hm)[::-1][:8]:
        x, y = xp[i], xm[i]
        for _ in range(ascent_steps):
            gap = np.linalg.norm(x - y)
            best = max(best, gap)
            if gap == 0.0:
                break
            d = (x - y) / gap
            _, pts = czono.support_points(Z, np.vstack([d, -d]))
            x_new, y_new = pts
            if np.linalg.norm(x_new - y_new) <= gap * (1 + 1e-12):
                break
            x, y = x_new, y_new
        best = max(best, float(np.linalg.norm(x - y)))
    return best

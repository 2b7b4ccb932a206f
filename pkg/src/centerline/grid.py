"""BEV grid geometry and piecewise-linear curve primitives.

Grid convention: row index ``i`` runs along world ``x`` (forward), column
index ``j`` along world ``y`` (lateral).  Heights are stored normalized to
``[0, 1]`` over the grid's ``[z_min_m, z_max_m]`` range.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

__all__ = [
    "GridSpec",
    "QuadDirection",
    "as_polyline",
    "grid_to_world",
    "world_to_grid",
    "closest_point_on_polyline",
    "project_points",
    "arc_lengths",
    "arc_length_resample",
]


class QuadDirection(str, enum.Enum):
    """Coarse flow label of a centerline."""

    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"

    @property
    def vertical(self) -> bool:
        """True for up/down: row-wise expectation, curve fitted as y = f(x)."""
        return self in (QuadDirection.UP, QuadDirection.DOWN)

    @classmethod
    def parse(cls, value) -> "QuadDirection":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidInput(f"unknown direction {value!r}") from None


@dataclass(frozen=True)
class GridSpec:
    """Shape and world placement of a BEV grid.

    ``origin_world`` is the world (x, y) of the center of cell (0, 0).
    Defaults give a 200 x 104 grid at 0.5 m centered on the ego vehicle.
    """

    height_cells: int = 200
    width_cells: int = 104
    cell_size_m: float = 0.5
    origin_world: tuple[float, float] = (-49.75, -25.75)
    z_min_m: float = -10.0
    z_max_m: float = 10.0

    def __post_init__(self):
        if int(self.height_cells) != self.height_cells or self.height_cells <= 0:
            raise InvalidInput("height_cells must be a positive integer")
        if int(self.width_cells) != self.width_cells or self.width_cells <= 0:
            raise InvalidInput("width_cells must be a positive integer")
        if not (np.isfinite(self.cell_size_m) and self.cell_size_m > 0):
            raise InvalidInput("cell_size_m must be positive")
        if not (np.isfinite(self.z_min_m) and np.isfinite(self.z_max_m)):
            raise InvalidInput("z range must be finite")
        if self.z_max_m <= self.z_min_m:
            raise InvalidInput("z_max_m must exceed z_min_m")
        origin = tuple(float(v) for v in self.origin_world)
        if len(origin) != 2 or not all(np.isfinite(origin)):
            raise InvalidInput("origin_world must be two finite numbers")
        object.__setattr__(self, "height_cells", int(self.height_cells))
        object.__setattr__(self, "width_cells", int(self.width_cells))
        object.__setattr__(self, "origin_world", origin)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height_cells, self.width_cells)

    @property
    def z_span(self) -> float:
        return self.z_max_m - self.z_min_m

    def normalize_height(self, z):
        return (np.asarray(z, dtype=float) - self.z_min_m) / self.z_span

    def denormalize_height(self, h):
        return self.z_min_m + np.asarray(h, dtype=float) * self.z_span

    def to_dict(self) -> dict:
        return {
            "height_cells": self.height_cells,
            "width_cells": self.width_cells,
            "cell_size_m": self.cell_size_m,
            "origin_world": list(self.origin_world),
            "z_min_m": self.z_min_m,
            "z_max_m": self.z_max_m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridSpec":
        try:
            return cls(
                height_cells=data["height_cells"],
                width_cells=data["width_cells"],
                cell_size_m=float(data["cell_size_m"]),
                origin_world=tuple(data["origin_world"]),
                z_min_m=float(data["z_min_m"]),
                z_max_m=float(data["z_max_m"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed grid spec: {exc}") from None


def _finite_points(p, name="point") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 3:
        raise InvalidInput(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} has non-finite values")
    return arr


def grid_to_world(spec: GridSpec, p) -> np.ndarray:
    """Map ``(i, j, h_norm)`` (or an ``(N, 3)`` array of them) to world meters."""
    g = _finite_points(p)
    out = np.empty_like(g)
    out[..., 0] = spec.origin_world[0] + g[..., 0] * spec.cell_size_m
    out[..., 1] = spec.origin_world[1] + g[..., 1] * spec.cell_size_m
    out[..., 2] = spec.denormalize_height(g[..., 2])
    return out


def world_to_grid(spec: GridSpec, p) -> np.ndarray:
    """Inverse of :func:`grid_to_world`."""
    w = _finite_points(p)
    out = np.empty_like(w)
    out[..., 0] = (w[..., 0] - spec.origin_world[0]) / spec.cell_size_m
    out[..., 1] = (w[..., 1] - spec.origin_world[1]) / spec.cell_size_m
    out[..., 2] = spec.normalize_height(w[..., 2])
    return out


def as_polyline(points, *, min_points: int = 2) -> np.ndarray:
    """Validate and return an ``(N, 3)`` float array.

    Raises InvalidInput for fewer than ``min_points`` points, non-finite
    values, or repeated consecutive points.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidInput(f"polyline must be (N, 3), got shape {arr.shape}")
    if len(arr) < min_points:
        raise InvalidInput(f"polyline needs at least {min_points} points")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("polyline has non-finite coordinates")
    steps = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    if np.any(steps <= 1e-9):
        raise InvalidInput("polyline has repeated consecutive points")
    return arr


def arc_lengths(points) -> np.ndarray:
    """Cumulative 3D arc length at each vertex, starting at 0."""
    arr = np.asarray(points, dtype=float)
    steps = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def project_points(polyline, queries):
    """Planar closest points on a polyline for many (x, y) queries.

    Works in whatever frame the inputs share (world meters or grid cells).
    Returns ``(closest, arc_param, dist)`` where ``closest`` is ``(M, 3)``
    with the third coordinate interpolated along the hit segment.  Exact
    ties go to the smallest arc parameter.
    """
    c = np.asarray(polyline, dtype=float)
    q = np.asarray(queries, dtype=float).reshape(-1, 2)
    qx, qy = q[:, 0], q[:, 1]
    cum = arc_lengths(c)

    best_d2 = np.full(len(q), np.inf)
    best_seg = np.zeros(len(q), dtype=int)
    best_t = np.zeros(len(q))
    for k in range(len(c) - 1):
        ax, ay = c[k, 0], c[k, 1]
        abx, aby = c[k + 1, 0] - ax, c[k + 1, 1] - ay
        denom = abx * abx + aby * aby
        dx, dy = qx - ax, qy - ay
        if denom > 0.0:
            t = np.clip((dx * abx + dy * aby) / denom, 0.0, 1.0)
        else:
            # vertical segment: planar footprint is a single point
            t = np.zeros(len(q))
        ex, ey = dx - t * abx, dy - t * aby
        d2 = ex * ex + ey * ey
        better = d2 < best_d2
        best_d2 = np.where(better, d2, best_d2)
        best_seg = np.where(better, k, best_seg)
        best_t = np.where(better, t, best_t)
    a, b = c[best_seg], c[best_seg + 1]
    best_pt = a + best_t[:, None] * (b - a)
    best_s = cum[best_seg] + best_t * (cum[best_seg + 1] - cum[best_seg])
    return best_pt, best_s, np.sqrt(best_d2)


def closest_point_on_polyline(c, q):
    """Planar projection of ``q = (x, y)`` onto polyline ``c``.

    Returns ``(point_3d, arc_param)``; z is interpolated along the segment.
    """
    c = as_polyline(c)
    q = np.asarray(q, dtype=float)
    if q.shape != (2,) or not np.all(np.isfinite(q)):
        raise InvalidInput("query must be a finite (x, y) pair")
    pt, s, _ = project_points(c, q[None, :])
    return pt[0], float(s[0])


def arc_length_resample(p, n: int) -> np.ndarray:
    """Resample a polyline to ``n`` points equally spaced in arc length.

    The first and last output points are the input endpoints exactly.
    """
    if int(n) != n or n < 2:
        raise InvalidInput("n must be an integer >= 2")
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or len(p) < 2:
        raise InvalidInput("polyline needs at least 2 points")
    cum = arc_lengths(p)
    total = cum[-1]
    if not np.isfinite(total) or total <= 0.0:
        raise InvalidInput("polyline has zero length")
    targets = np.linspace(0.0, total, int(n))
    out = np.empty((int(n), p.shape[1]))
    for dim in range(p.shape[1]):
        out[:, dim] = np.interp(targets, cum, p[:, dim])
    out[0] = p[0]
    out[-1] = p[-1]
    return out

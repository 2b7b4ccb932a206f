"""Seeded synthetic centerlines and scenes (straight, arc and ramp shapes)."""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, QuadDirection, arc_length_resample
from .io import Scene, SceneInstance
from .targets import build_targets

__all__ = ["KINDS", "make_centerline", "make_centerlines", "make_scene", "grid_extent"]

KINDS = ("straight", "arc", "ramp")


def grid_extent(spec: GridSpec, margin_m: float = 0.0):
    """World ``(xmin, xmax, ymin, ymax)`` of cell centers, shrunk by ``margin_m``."""
    x0, y0 = spec.origin_world
    c = spec.cell_size_m
    return (
        x0 + margin_m,
        x0 + (spec.height_cells - 1) * c - margin_m,
        y0 + margin_m,
        y0 + (spec.width_cells - 1) * c - margin_m,
    )


def _heading_curve(length, heading, curvature, n):
    s = np.linspace(0.0, length, n)
    if abs(curvature) < 1e-12:
        x = s * np.cos(heading)
        y = s * np.sin(heading)
    else:
        x = (np.sin(heading + curvature * s) - np.sin(heading)) / curvature
        y = (np.cos(heading) - np.cos(heading + curvature * s)) / curvature
    return s, x, y


def _fits(pts, spec, margin):
    xmin, xmax, ymin, ymax = grid_extent(spec, margin)
    return (
        pts[:, 0].min() >= xmin
        and pts[:, 0].max() <= xmax
        and pts[:, 1].min() >= ymin
        and pts[:, 1].max() <= ymax
    )


def make_centerline(rng: np.random.Generator, kind: str, spec: GridSpec = GridSpec(), n: int = 60, margin_m: float = 3.0):
    """One curve whose flow axis is a function graph (heading within 35 deg).

    ``straight``: flat line.  ``arc``: constant-curvature arc at constant
    height.  ``ramp``: straight line with height linear in arc length.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    xmin, xmax, ymin, ymax = grid_extent(spec, margin_m)
    for _ in range(1000):
        direction = QuadDirection(rng.choice([d.value for d in QuadDirection]))
        along = (xmin, xmax) if direction.vertical else (ymin, ymax)
        span = along[1] - along[0]
        length = rng.uniform(0.3, 0.8) * span
        heading = np.deg2rad(rng.uniform(-25.0, 25.0))
        curvature = 0.0
        if kind == "arc":
            radius = rng.uniform(40.0, 90.0)
            curvature = rng.choice([-1.0, 1.0]) / radius
            length = min(length, np.deg2rad(50.0) * radius)
            # keep total heading change bounded so the curve stays a graph
            heading = -0.5 * curvature * length + np.deg2rad(rng.uniform(-8.0, 8.0))
        s, a, b = _heading_curve(length, heading, curvature, n)
        z0 = rng.uniform(-2.0, 2.0)
        grade = rng.uniform(0.02, 0.08) * rng.choice([-1.0, 1.0]) if kind == "ramp" else 0.0
        z = z0 + grade * s
        # a runs along the flow axis, b across it
        if direction.vertical:
            pts = np.stack([a, b, z], axis=1)
        else:
            pts = np.stack([b, a, z], axis=1)
        if direction in (QuadDirection.DOWN, QuadDirection.LEFT):
            pts[:, :2] *= -1.0
        lo = pts[:, :2].min(axis=0)
        hi = pts[:, :2].max(axis=0)
        room_lo = np.array([xmin, ymin]) - lo
        room_hi = np.array([xmax, ymax]) - hi
        if np.any(room_hi < room_lo):
            continue
        pts[:, :2] += rng.uniform(room_lo, room_hi)
        if _fits(pts, spec, margin_m):
            return pts, direction
    raise RuntimeError("could not place a synthetic curve on the grid")


def make_centerlines(seed: int, count: int, spec: GridSpec = GridSpec(), kinds=KINDS):
    """``count`` curves cycling through ``kinds``; returns ``[(points, direction, kind)]``."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        kind = kinds[k % len(kinds)]
        pts, direction = make_centerline(rng, kind, spec)
        out.append((pts, direction, kind))
    return out


def make_scene(seed: int, n_roads: int = 3, pieces_per_road: int = 2, spec: GridSpec = GridSpec()) -> Scene:
    """A GT scene of chained centerline pieces with successor edges.

    Each road is one synthetic curve cut into consecutive pieces; edges link
    a piece to the next one.  Straight pieces carry exact Bezier control
    points.
    """
    rng = np.random.default_rng(seed)
    instances, edges = [], []
    for r in range(n_roads):
        kind = KINDS[r % len(KINDS)]
        for _ in range(100):
            pts, direction = make_centerline(rng, kind, spec, n=30 * pieces_per_road + 1)
            cuts = np.linspace(0, len(pts) - 1, pieces_per_road + 1).astype(int)
            pieces = [pts[cuts[p] : cuts[p + 1] + 1] for p in range(pieces_per_road)]
            # every piece must rasterize into a usable mask
            if all(build_targets(pc, spec).mask.sum() >= 8 for pc in pieces):
                break
        prev = None
        for p, piece in enumerate(pieces):
            vid = f"r{r}p{p}"
            cp = None
            if kind != "arc":
                cp = arc_length_resample(piece[[0, -1]], 4)
            instances.append(SceneInstance(vid, piece, 1.0, direction, cp))
            if prev is not None:
                edges.append((prev, vid, 1.0))
            prev = vid
    xmin, xmax, ymin, ymax = grid_extent(spec)
    footprint = [[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]]
    return Scene(spec, instances, edges, footprint)

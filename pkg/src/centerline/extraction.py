"""Dense prediction maps to refined grid-space point sets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMask, InvalidInput
from .grid import GridSpec, QuadDirection

__all__ = [
    "CenterlineInstance",
    "GridPointSet",
    "binarize",
    "expectation_extract",
    "single_point_proposal",
    "multi_point_proposal",
    "extract_points",
    "PROPOSALS",
]

PROPOSALS = ("none", "single", "multi")


@dataclass
class CenterlineInstance:
    """Outputs of one decoder query.  Grids share ``spec``."""

    spec: GridSpec
    direction: QuadDirection
    class_confidence: float
    prob_map: np.ndarray
    offset: np.ndarray
    height: np.ndarray
    bezier_cp: np.ndarray | None = None
    id: str = ""

    def __post_init__(self):
        self.direction = QuadDirection.parse(self.direction)
        if not 0.0 <= self.class_confidence <= 1.0:
            raise InvalidInput("class_confidence must lie in [0, 1]")
        shape = self.spec.shape
        self.prob_map = np.asarray(self.prob_map, dtype=float)
        self.offset = np.asarray(self.offset, dtype=float)
        self.height = np.asarray(self.height, dtype=float)
        if self.prob_map.shape != shape or self.height.shape != shape:
            raise InvalidInput(f"maps must have shape {shape}")
        if self.offset.shape != shape + (2,):
            raise InvalidInput(f"offset must have shape {shape + (2,)}")
        for name in ("prob_map", "offset", "height"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise InvalidInput(f"{name} has non-finite values")
        if self.prob_map.min() < 0.0 or self.prob_map.max() > 1.0:
            raise InvalidInput("prob_map values must lie in [0, 1]")
        if self.bezier_cp is not None:
            cp = np.asarray(self.bezier_cp, dtype=float)
            if cp.ndim != 2 or cp.shape[1] != 3 or len(cp) < 2:
                raise InvalidInput("bezier_cp must be (K, 3) with K >= 2")
            self.bezier_cp = cp


@dataclass
class GridPointSet:
    points: np.ndarray  # (N, 3): i, j, h_norm
    provenance: str
    clamped: int = 0
    notes: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)


def binarize(prob, tau: float = 0.95) -> np.ndarray:
    """``1[prob >= tau]`` as a float grid."""
    if not 0.0 < tau < 1.0:
        raise InvalidInput("tau must lie in (0, 1)")
    return (np.asarray(prob, dtype=float) >= tau).astype(float)


def expectation_extract(mask, direction) -> GridPointSet:
    """Row-wise (up/down) or column-wise (left/right) foreground centroid.

    Rows or columns without foreground are skipped.  Heights are set to the
    0.5 placeholder.
    """
    direction = QuadDirection.parse(direction)
    r = np.asarray(mask, dtype=float)
    if r.ndim != 2:
        raise InvalidInput("mask must be 2-D")
    if not r.any():
        raise EmptyMask("mask has no foreground")
    if direction.vertical:
        counts = r.sum(axis=1)
        rows = np.nonzero(counts)[0]
        j_hat = (r[rows] @ np.arange(r.shape[1], dtype=float)) / counts[rows]
        pts = np.stack([rows.astype(float), j_hat, np.full(len(rows), 0.5)], axis=1)
    else:
        counts = r.sum(axis=0)
        cols = np.nonzero(counts)[0]
        i_hat = (np.arange(r.shape[0], dtype=float) @ r[:, cols]) / counts[cols]
        pts = np.stack([i_hat, cols.astype(float), np.full(len(cols), 0.5)], axis=1)
    return GridPointSet(pts, "baseline")


def _round_half_up(x):
    return np.floor(np.asarray(x, dtype=float) + 0.5).astype(int)


def single_point_proposal(baseline: GridPointSet, offset, height) -> GridPointSet:
    """Refine each baseline point by the offset/height at its nearest cell."""
    offset = np.asarray(offset, dtype=float)
    height = np.asarray(height, dtype=float)
    h, w = height.shape
    pts = baseline.points
    ri = _round_half_up(pts[:, 0])
    rj = _round_half_up(pts[:, 1])
    ci = np.clip(ri, 0, h - 1)
    cj = np.clip(rj, 0, w - 1)
    clamped = int(np.sum((ci != ri) | (cj != rj)))
    out = np.stack(
        [pts[:, 0] + offset[ci, cj, 0], pts[:, 1] + offset[ci, cj, 1], height[ci, cj]],
        axis=1,
    )
    notes = [f"{clamped} sampling cells clamped to border"] if clamped else []
    return GridPointSet(out, "single_proposal", clamped=clamped, notes=notes)


def multi_point_proposal(mask, offset, height) -> GridPointSet:
    """One refined point per foreground cell, in row-major order."""
    r = np.asarray(mask, dtype=float)
    offset = np.asarray(offset, dtype=float)
    height = np.asarray(height, dtype=float)
    ii, jj = np.nonzero(r)
    if len(ii) == 0:
        raise EmptyMask("mask has no foreground")
    out = np.stack(
        [ii + offset[ii, jj, 0], jj + offset[ii, jj, 1], height[ii, jj]], axis=1
    )
    return GridPointSet(out, "multi_proposal")


def extract_points(inst: CenterlineInstance, tau: float = 0.95, proposal: str = "multi") -> GridPointSet:
    """Binarize an instance's probability map and run the chosen proposal."""
    if proposal not in PROPOSALS:
        raise InvalidInput(f"proposal must be one of {PROPOSALS}")
    mask = binarize(inst.prob_map, tau)
    if proposal == "multi":
        return multi_point_proposal(mask, inst.offset, inst.height)
    baseline = expectation_extract(mask, inst.direction)
    if proposal == "single":
        return single_point_proposal(baseline, inst.offset, inst.height)
    return baseline

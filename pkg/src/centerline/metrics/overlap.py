"""Train/validation footprint overlap audit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import Polygon, box
from shapely.strtree import STRtree

from ..errors import InvalidInput

__all__ = ["OverlapReport", "as_footprint", "audit_geographic_overlap", "AREA_TOLERANCE_M2"]

AREA_TOLERANCE_M2 = 1e-6


@dataclass
class OverlapReport:
    total_intersection_area: float
    intersecting_pairs: int
    disjoint: bool
    pairs: list = field(default_factory=list)  # (train_idx, val_idx, area)

    def to_dict(self) -> dict:
        return {
            "disjoint": self.disjoint,
            "intersecting_pairs": self.intersecting_pairs,
            "total_intersection_area": self.total_intersection_area,
            "pairs": [list(p) for p in self.pairs],
        }


def as_footprint(fp) -> Polygon:
    """Polygon from ``[[x, y], ...]`` (>= 3 vertices) or a ``[xmin, ymin, xmax, ymax]`` box."""
    try:
        arr = np.asarray(fp, dtype=float)
    except (TypeError, ValueError):
        raise InvalidInput("footprint is not numeric") from None
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("footprint has non-finite coordinates")
    if arr.shape == (4,):
        xmin, ymin, xmax, ymax = arr
        if xmax <= xmin or ymax <= ymin:
            raise InvalidInput("bbox must satisfy xmin < xmax and ymin < ymax")
        return box(xmin, ymin, xmax, ymax)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
        raise InvalidInput("polygon footprint needs >= 3 (x, y) vertices")
    poly = Polygon(arr)
    if not poly.is_valid or poly.area <= 0:
        raise InvalidInput("footprint polygon is invalid or has zero area")
    return poly


def audit_geographic_overlap(train_footprints, val_footprints) -> OverlapReport:
    """Pairwise intersection areas between two footprint sets.

    ``disjoint`` is true iff no train/val pair intersects by more than
    1e-6 square meters.
    """
    train = [as_footprint(f) for f in train_footprints]
    val = [as_footprint(f) for f in val_footprints]
    pairs = []
    if train and val:
        tree = STRtree(train)
        for v_idx, v in enumerate(val):
            for t_idx in sorted(int(k) for k in tree.query(v)):
                area = float(train[t_idx].intersection(v).area)
                if area > AREA_TOLERANCE_M2:
                    pairs.append((t_idx, v_idx, area))
    pairs.sort()
    total = float(sum(a for *_, a in pairs))
    return OverlapReport(total, len(pairs), not pairs, pairs)

"""Optimal one-to-one assignment."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import InvalidInput

__all__ = ["hungarian"]


def hungarian(cost) -> tuple[list[tuple[int, int]], float]:
    """Minimum-cost matching of ``min(rows, cols)`` pairs.

    Returns the ``(row, col)`` pairs sorted by row and their total cost.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise InvalidInput("cost must be a 2-D matrix")
    if cost.size == 0:
        return [], 0.0
    if not np.all(np.isfinite(cost)):
        raise InvalidInput("cost must be finite")
    rows, cols = linear_sum_assignment(cost)
    pairs = sorted(zip(rows.tolist(), cols.tolist()))
    return pairs, float(cost[rows, cols].sum())

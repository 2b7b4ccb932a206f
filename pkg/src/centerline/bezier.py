"""Bezier curve evaluation and sampling."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .grid import arc_length_resample

__all__ = ["check_control_points", "bezier_eval", "sample_bezier"]


def check_control_points(cp) -> np.ndarray:
    cp = np.asarray(cp, dtype=float)
    if cp.ndim != 2 or cp.shape[1] != 3 or len(cp) < 2:
        raise InvalidInput("control points must be (K, 3) with K >= 2")
    if not np.all(np.isfinite(cp)):
        raise InvalidInput("control points must be finite")
    return cp


def _de_casteljau(cp: np.ndarray, t: np.ndarray) -> np.ndarray:
    # cp: (K, 3), t: (M,) -> (M, 3)
    work = np.broadcast_to(cp, (len(t),) + cp.shape).copy()
    s = t[:, None, None]
    for level in range(len(cp) - 1, 0, -1):
        work = (1.0 - s) * work[:, :level] + s * work[:, 1 : level + 1]
    return work[:, 0]


def bezier_eval(cp, t: float) -> np.ndarray:
    """Point at parameter ``t`` in [0, 1], by de Casteljau recursion."""
    cp = check_control_points(cp)
    if not 0.0 <= t <= 1.0:
        raise InvalidInput("t must lie in [0, 1]")
    return _de_casteljau(cp, np.array([float(t)]))[0]


def sample_bezier(cp, n: int, spacing: str = "uniform") -> np.ndarray:
    """``n`` ordered points along the curve.

    ``spacing="uniform"`` evaluates at ``t = k / (n - 1)``;
    ``spacing="arc"`` samples densely then resamples to equal arc length.
    """
    cp = check_control_points(cp)
    if int(n) != n or n < 2:
        raise InvalidInput("n must be an integer >= 2")
    if spacing == "uniform":
        return _de_casteljau(cp, np.linspace(0.0, 1.0, int(n)))
    if spacing == "arc":
        dense = _de_casteljau(cp, np.linspace(0.0, 1.0, max(200, 20 * int(n))))
        if np.ptp(dense, axis=0).max() == 0.0:
            return dense[: int(n)]
        return arc_length_resample(dense, int(n))
    raise InvalidInput("spacing must be 'uniform' or 'arc'")

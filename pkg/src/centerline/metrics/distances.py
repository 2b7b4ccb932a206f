"""Curve-to-curve distances over sampled points."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import InvalidInput

__all__ = ["discrete_frechet", "chamfer", "pairwise"]


def _pts(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 2 or len(arr) == 0:
        raise InvalidInput("expected a non-empty (N, D) point array")
    return arr


def discrete_frechet(a, b) -> float:
    """Discrete Frechet distance (Eiter & Mannila coupling DP)."""
    d = cdist(_pts(a), _pts(b))
    n, m = d.shape
    ca = np.empty(m)
    ca[0] = d[0, 0]
    for j in range(1, m):
        ca[j] = max(ca[j - 1], d[0, j])
    for i in range(1, n):
        row = d[i]
        prev = ca
        ca = np.empty(m)
        ca[0] = max(prev[0], row[0])
        for j in range(1, m):
            ca[j] = max(min(prev[j], prev[j - 1], ca[j - 1]), row[j])
    return float(ca[-1])


def chamfer(a, b) -> float:
    """Symmetric mean nearest-point distance: ``(mean_a + mean_b) / 2``."""
    d = cdist(_pts(a), _pts(b))
    return float(0.5 * (d.min(axis=1).mean() + d.min(axis=0).mean()))


def pairwise(preds, gts, metric) -> np.ndarray:
    """``(len(preds), len(gts))`` matrix of ``metric(pred, gt)``."""
    out = np.empty((len(preds), len(gts)))
    for r, p in enumerate(preds):
        for c, g in enumerate(gts):
            out[r, c] = metric(p, g)
    return out

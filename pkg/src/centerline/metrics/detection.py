"""Detection mAP over curve-distance thresholds."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from .assignment import hungarian
from .distances import chamfer, discrete_frechet, pairwise

__all__ = [
    "DISTANCES",
    "average_precision",
    "match_detections",
    "det_score",
    "pooled_ap",
]

DISTANCES = {"frechet": discrete_frechet, "chamfer": chamfer}

# stands in for "no valid match" in the optimal-matching mode
_FORBIDDEN = 1e9


def average_precision(confidences, tp, n_gt: int) -> float:
    """All-point interpolated AP in [0, 1].

    Detections are ranked by descending confidence (stable on ties).
    ``n_gt == 0`` gives 1.0 when there are no detections, else 0.0.
    """
    conf = np.asarray(confidences, dtype=float)
    hits = np.asarray(tp, dtype=bool)
    if n_gt == 0:
        return 1.0 if len(conf) == 0 else 0.0
    if len(conf) == 0:
        return 0.0
    order = np.argsort(-conf, kind="stable")
    hits = hits[order]
    ctp = np.cumsum(hits)
    cfp = np.cumsum(~hits)
    recall = ctp / n_gt
    precision = ctp / (ctp + cfp)
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    return float(np.sum(np.diff(mrec) * mpre[1:]))


def match_detections(dist, confidences, theta: float, matching: str = "greedy") -> np.ndarray:
    """True-positive flag per prediction at one threshold.

    ``greedy``: predictions in descending confidence each take the nearest
    still-unmatched GT if it is closer than ``theta``.  ``hungarian``:
    globally optimal one-to-one matching restricted to pairs under ``theta``.
    """
    dist = np.asarray(dist, dtype=float)
    n_pred, n_gt = dist.shape
    tp = np.zeros(n_pred, dtype=bool)
    if n_pred == 0 or n_gt == 0:
        return tp
    if matching == "greedy":
        taken = np.zeros(n_gt, dtype=bool)
        for r in np.argsort(-np.asarray(confidences, dtype=float), kind="stable"):
            row = np.where(taken, np.inf, dist[r])
            c = int(np.argmin(row))
            if row[c] < theta:
                taken[c] = True
                tp[r] = True
    elif matching == "hungarian":
        cost = np.where(dist < theta, dist, _FORBIDDEN)
        for r, c in hungarian(cost)[0]:
            if dist[r, c] < theta:
                tp[r] = True
    else:
        raise InvalidInput(f"unknown matching mode {matching!r}")
    return tp


def pooled_ap(per_scene, n_gt_total: int) -> float:
    """AP over ``[(confidences, tp), ...]`` pooled across scenes."""
    if per_scene:
        conf = np.concatenate([np.asarray(c, dtype=float) for c, _ in per_scene])
        tp = np.concatenate([np.asarray(t, dtype=bool) for _, t in per_scene])
    else:
        conf, tp = np.zeros(0), np.zeros(0, dtype=bool)
    return average_precision(conf, tp, n_gt_total)


def det_score(preds, gts, distance="frechet", thresholds=(1.0, 2.0, 3.0), matching="greedy", per_threshold=False):
    """Mean AP over thresholds, in percent, for a single scene.

    ``preds`` is a list of ``(polyline, confidence)``; ``gts`` a list of
    polylines.  With ``per_threshold=True`` also returns ``{theta: AP%}``.
    """
    metric = DISTANCES[distance] if isinstance(distance, str) else distance
    if not thresholds:
        raise InvalidInput("need at least one threshold")
    curves = [p for p, _ in preds]
    conf = np.array([c for _, c in preds], dtype=float)
    dist = pairwise(curves, gts, metric)
    aps = {}
    for theta in thresholds:
        tp = match_detections(dist, conf, theta, matching)
        aps[theta] = 100.0 * average_precision(conf, tp, len(gts))
    score = float(np.mean(list(aps.values())))
    return (score, aps) if per_threshold else score

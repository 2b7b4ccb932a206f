"""Lane-to-lane topology AP (TOP_ll) and confidence remapping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput
from .assignment import hungarian

__all__ = ["SceneGraph", "score_remap", "topology_aps", "aggregate_topology", "top_ll"]


@dataclass
class SceneGraph:
    """Centerline vertices plus directed, confidence-weighted edges.

    ``vertices`` maps id -> ``(polyline, confidence)`` in insertion order.
    """

    vertices: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)

    def __post_init__(self):
        for vid, (_, conf) in self.vertices.items():
            if not 0.0 <= conf <= 1.0:
                raise InvalidInput(f"vertex {vid!r} confidence outside [0, 1]")
        clean = []
        for src, dst, conf in self.edges:
            if src not in self.vertices or dst not in self.vertices:
                raise InvalidInput(f"edge {src!r}->{dst!r} references an unknown vertex")
            if src == dst:
                raise InvalidInput(f"self-loop on {src!r}")
            if not 0.0 <= conf <= 1.0:
                raise InvalidInput(f"edge {src!r}->{dst!r} confidence outside [0, 1]")
            clean.append((src, dst, float(conf)))
        self.edges = clean

    @property
    def ids(self) -> list:
        return list(self.vertices)

    def curves(self) -> list:
        return [pl for pl, _ in self.vertices.values()]

    def confidences(self) -> list:
        return [c for _, c in self.vertices.values()]


def score_remap(conf: float, floor: float = 0.05, bonus: float = 1.0) -> float:
    """Add ``bonus`` to confidences strictly above ``floor``."""
    if not 0.0 <= conf <= 1.0:
        raise InvalidInput("confidence must lie in [0, 1]")
    return conf + bonus if conf > floor else conf


def _ranked_ap(values: np.ndarray, positives: np.ndarray, threshold: float) -> float:
    """AP over candidates above ``threshold``; ``positives`` marks true neighbors."""
    keep = np.nonzero(values > threshold)[0]
    order = keep[np.argsort(-values[keep], kind="stable")]
    hits = positives[order]
    if not hits.any():
        return 0.0
    ranks = np.arange(1, len(order) + 1)
    precision = np.cumsum(hits) / ranks
    return float(precision[hits].sum() / positives.sum())


def topology_aps(
    pred: SceneGraph,
    gt: SceneGraph,
    frechet_dist: np.ndarray,
    thresholds,
    ranking_threshold: float = 0.5,
    unmatched_negative_penalty: float | None = None,
    remap: tuple[float, float] | None = None,
    epsilon: float = 1e-3,
) -> list:
    """Per-(threshold, vertex, direction) AP records for one scene.

    ``frechet_dist`` is the ``(len(pred), len(gt))`` vertex distance matrix.
    Returns ``[(theta, gt_vertex_id, "in"|"out", ap_or_None), ...]``; None
    marks a vertex with no GT neighbors in that direction.  ``remap`` is an
    optional ``(floor, bonus)`` applied to predicted edge confidences.
    """
    if unmatched_negative_penalty is None:
        unmatched_negative_penalty = ranking_threshold + epsilon
    gt_ids = gt.ids
    pred_ids = pred.ids
    n = len(gt_ids)
    gt_index = {v: k for k, v in enumerate(gt_ids)}
    pred_index = {v: k for k, v in enumerate(pred_ids)}

    gt_adj = np.zeros((n, n), dtype=bool)
    for s, d, _ in gt.edges:
        gt_adj[gt_index[s], gt_index[d]] = True

    pred_adj = np.zeros((len(pred_ids), len(pred_ids)))
    for s, d, c in pred.edges:
        if remap is not None:
            c = score_remap(c, *remap)
        a, b = pred_index[s], pred_index[d]
        pred_adj[a, b] = max(pred_adj[a, b], c)

    off_diag = ~np.eye(n, dtype=bool)
    records = []
    for theta in thresholds:
        match = np.full(n, -1)
        if len(pred_ids) and n:
            for r, c in hungarian(frechet_dist)[0]:
                if frechet_dist[r, c] < theta:
                    match[c] = r
        matched = match >= 0
        both = matched[:, None] & matched[None, :]
        mi = np.where(matched, match, 0)
        P = np.where(
            both,
            pred_adj[mi[:, None], mi[None, :]],
            np.where(gt_adj, 0.0, unmatched_negative_penalty),
        )
        for k, vid in enumerate(gt_ids):
            for direction, values, positives in (
                ("out", P[k], gt_adj[k]),
                ("in", P[:, k], gt_adj[:, k]),
            ):
                cand = off_diag[k]
                if not positives[cand].any():
                    records.append((theta, vid, direction, None))
                    continue
                ap = _ranked_ap(values[cand], positives[cand], ranking_threshold)
                records.append((theta, vid, direction, ap))
    return records


def aggregate_topology(records, n_vertices_total: int, n_thresholds: int, strict: bool = False, pred_has_edges: bool = True) -> float:
    """Mean AP in percent.

    Default mode averages over defined records.  ``strict`` divides by
    ``2 * |thresholds| * |V|`` counting undefined entries as zero.  With no
    defined record at all the score is 100 if the prediction has no edges
    and 0 otherwise.
    """
    defined = [ap for *_, ap in records if ap is not None]
    if not defined:
        return 0.0 if pred_has_edges else 100.0
    if strict:
        denom = 2 * n_thresholds * n_vertices_total
        return 100.0 * float(np.sum(defined)) / denom
    return 100.0 * float(np.mean(defined))


def top_ll(pred: SceneGraph, gt: SceneGraph, cfg=None, **overrides) -> float:
    """TOP_ll in percent for a single scene under ``cfg`` (a MetricConfig)."""
    from .report import MetricConfig, topology_score

    cfg = cfg or MetricConfig()
    if overrides:
        cfg = cfg.replace(**overrides)
    return topology_score([(pred, gt)], cfg)

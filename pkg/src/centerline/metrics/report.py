"""Metric configuration, per-scene evaluation and the OLS_l report."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .._parallel import ordered_map
from ..errors import InvalidInput
from ..grid import arc_length_resample
from .detection import match_detections, pooled_ap
from .distances import chamfer, discrete_frechet, pairwise
from .topology import SceneGraph, aggregate_topology, topology_aps

__all__ = [
    "MetricConfig",
    "MetricReport",
    "ols_l",
    "evaluate",
    "topology_score",
    "FLAWED_THRESHOLD",
    "FIXED_THRESHOLD",
]

FLAWED_THRESHOLD = 0.5
FIXED_THRESHOLD = 0.01


@dataclass(frozen=True)
class MetricConfig:
    frechet_thresholds_m: tuple = (1.0, 2.0, 3.0)
    chamfer_thresholds_m: tuple = (0.5, 1.0, 1.5)
    ranking_threshold: float = FLAWED_THRESHOLD
    # None: ranking_threshold + epsilon
    unmatched_negative_penalty: float | None = None
    epsilon: float = 1e-3
    remap_enabled: bool = False
    remap_floor: float = 0.05
    remap_bonus: float = 1.0
    det_matching: str = "greedy"
    top_strict: bool = False
    # curves are arc-resampled to this many points before distances; None keeps raw
    resample_points: int | None = 11

    def __post_init__(self):
        for name in ("frechet_thresholds_m", "chamfer_thresholds_m"):
            values = tuple(float(v) for v in getattr(self, name))
            if not values or any(v <= 0 for v in values) or list(values) != sorted(set(values)):
                raise InvalidInput(f"{name} must be positive and strictly ascending")
            object.__setattr__(self, name, values)
        if not 0.0 <= self.ranking_threshold < 1.0:
            raise InvalidInput("ranking_threshold must lie in [0, 1)")
        if self.det_matching not in ("greedy", "hungarian"):
            raise InvalidInput("det_matching must be 'greedy' or 'hungarian'")
        if self.resample_points is not None and self.resample_points < 2:
            raise InvalidInput("resample_points must be >= 2")

    def replace(self, **changes) -> "MetricConfig":
        return dataclasses.replace(self, **changes)

    @property
    def penalty(self) -> float:
        if self.unmatched_negative_penalty is not None:
            return self.unmatched_negative_penalty
        return self.ranking_threshold + self.epsilon

    @property
    def remap(self):
        return (self.remap_floor, self.remap_bonus) if self.remap_enabled else None


def ols_l(det_l: float, det_l_ch: float, top_ll: float) -> float:
    """``(DET_l + DET_l_ch + 100 * sqrt(TOP_ll / 100)) / 3``, all in percent."""
    for name, v in (("det_l", det_l), ("det_l_ch", det_l_ch), ("top_ll", top_ll)):
        if not (math.isfinite(v) and 0.0 <= v <= 100.0):
            raise InvalidInput(f"{name}={v} outside [0, 100]")
    return (det_l + det_l_ch + 100.0 * math.sqrt(top_ll / 100.0)) / 3.0


@dataclass
class MetricReport:
    det_l: float
    det_l_ch: float
    top_ll: float
    ols_l: float
    det_l_per_threshold: dict
    det_l_ch_per_threshold: dict
    top_ll_per_threshold: dict
    top_ll_variants: dict = field(default_factory=dict)
    per_scene: list = field(default_factory=list)

    def identity_error(self) -> float:
        return abs(self.ols_l - ols_l(self.det_l, self.det_l_ch, self.top_ll))

    def to_dict(self) -> dict:
        def keyed(d):
            return {f"{k:g}": v for k, v in d.items()}

        return {
            "det_l": self.det_l,
            "det_l_ch": self.det_l_ch,
            "top_ll": self.top_ll,
            "ols_l": self.ols_l,
            "det_l_per_threshold": keyed(self.det_l_per_threshold),
            "det_l_ch_per_threshold": keyed(self.det_l_ch_per_threshold),
            "top_ll_per_threshold": keyed(self.top_ll_per_threshold),
            "top_ll_variants": dict(self.top_ll_variants),
            "per_scene": list(self.per_scene),
        }


def _prepare(curves, n):
    out = []
    for c in curves:
        c = np.asarray(c, dtype=float)
        out.append(arc_length_resample(c, n) if n is not None else c)
    return out


def _variants(cfg: MetricConfig) -> dict:
    return {
        "flawed": cfg.replace(ranking_threshold=FLAWED_THRESHOLD, remap_enabled=False),
        "fixed": cfg.replace(ranking_threshold=FIXED_THRESHOLD, remap_enabled=False),
        "remapped": cfg.replace(ranking_threshold=FLAWED_THRESHOLD, remap_enabled=True),
    }


def _topology_records(pred, gt, frechet, cfg: MetricConfig):
    return topology_aps(
        pred,
        gt,
        frechet,
        cfg.frechet_thresholds_m,
        ranking_threshold=cfg.ranking_threshold,
        unmatched_negative_penalty=cfg.penalty,
        remap=cfg.remap,
        epsilon=cfg.epsilon,
    )


def _evaluate_scene(pred: SceneGraph, gt: SceneGraph, cfg: MetricConfig, variants: dict):
    pc = _prepare(pred.curves(), cfg.resample_points)
    gc = _prepare(gt.curves(), cfg.resample_points)
    conf = np.array(pred.confidences(), dtype=float)
    fre = pairwise(pc, gc, discrete_frechet)
    cha = pairwise(pc, gc, chamfer)
    det = {t: (conf, match_detections(fre, conf, t, cfg.det_matching)) for t in cfg.frechet_thresholds_m}
    det_ch = {t: (conf, match_detections(cha, conf, t, cfg.det_matching)) for t in cfg.chamfer_thresholds_m}
    top = {"primary": _topology_records(pred, gt, fre, cfg)}
    for name, vcfg in variants.items():
        top[name] = _topology_records(pred, gt, fre, vcfg)
    return {"n_gt": len(gc), "det": det, "det_ch": det_ch, "top": top, "pred_edges": bool(pred.edges)}


def _det_percent(parts, thresholds, key, n_gt):
    per = {t: 100.0 * pooled_ap([p[key][t] for p in parts], n_gt) for t in thresholds}
    return float(np.mean(list(per.values()))), per


def _top_percent(parts, name, cfg, n_vertices):
    records = [r for p in parts for r in p["top"][name]]
    pred_edges = any(p["pred_edges"] for p in parts)
    overall = aggregate_topology(records, n_vertices, len(cfg.frechet_thresholds_m), cfg.top_strict, pred_edges)
    per = {
        t: aggregate_topology([r for r in records if r[0] == t], n_vertices, 1, cfg.top_strict, pred_edges)
        for t in cfg.frechet_thresholds_m
    }
    return overall, per


def topology_score(scene_pairs, cfg: MetricConfig) -> float:
    parts = []
    n_vertices = 0
    for pred, gt in scene_pairs:
        fre = pairwise(
            _prepare(pred.curves(), cfg.resample_points),
            _prepare(gt.curves(), cfg.resample_points),
            discrete_frechet,
        )
        parts.append({"top": {"primary": _topology_records(pred, gt, fre, cfg)}, "pred_edges": bool(pred.edges)})
        n_vertices += len(gt.vertices)
    return _top_percent(parts, "primary", cfg, n_vertices)[0]


def evaluate(scene_pairs, cfg: MetricConfig = MetricConfig(), with_variants: bool = False, scene_ids=None) -> MetricReport:
    """Evaluate ``[(pred_graph, gt_graph), ...]`` into a :class:`MetricReport`.

    Detection APs pool predictions across scenes; topology APs average over
    every scene's (threshold, vertex, direction) entries.  Scenes may be
    processed concurrently; reduction follows input order.
    """
    scene_pairs = list(scene_pairs)
    if scene_ids is None:
        scene_ids = [str(k) for k in range(len(scene_pairs))]
    variants = _variants(cfg) if with_variants else {}
    parts = ordered_map(lambda pg: _evaluate_scene(pg[0], pg[1], cfg, variants), scene_pairs)

    n_gt = sum(p["n_gt"] for p in parts)
    det_l, det_per = _det_percent(parts, cfg.frechet_thresholds_m, "det", n_gt)
    det_ch, det_ch_per = _det_percent(parts, cfg.chamfer_thresholds_m, "det_ch", n_gt)
    top, top_per = _top_percent(parts, "primary", cfg, n_gt)
    variant_scores = {name: _top_percent(parts, name, variants[name], n_gt)[0] for name in variants}

    per_scene = []
    for sid, p in zip(scene_ids, parts):
        s_det = _det_percent([p], cfg.frechet_thresholds_m, "det", p["n_gt"])[0]
        s_ch = _det_percent([p], cfg.chamfer_thresholds_m, "det_ch", p["n_gt"])[0]
        s_top = _top_percent([p], "primary", cfg, p["n_gt"])[0]
        per_scene.append(
            {"scene": sid, "det_l": s_det, "det_l_ch": s_ch, "top_ll": s_top, "ols_l": ols_l(s_det, s_ch, s_top)}
        )

    return MetricReport(
        det_l=det_l,
        det_l_ch=det_ch,
        top_ll=top,
        ols_l=ols_l(det_l, det_ch, top),
        det_l_per_threshold=det_per,
        det_l_ch_per_threshold=det_ch_per,
        top_ll_per_threshold=top_per,
        top_ll_variants=variant_scores,
        per_scene=per_scene,
    )

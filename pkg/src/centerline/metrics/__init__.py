"""Centerline detection and topology evaluation."""

from .assignment import hungarian
from .detection import average_precision, det_score, match_detections
from .distances import chamfer, discrete_frechet
from .overlap import OverlapReport, audit_geographic_overlap
from .report import MetricConfig, MetricReport, evaluate, ols_l
from .topology import SceneGraph, score_remap, top_ll

__all__ = [
    "hungarian",
    "average_precision",
    "det_score",
    "match_detections",
    "chamfer",
    "discrete_frechet",
    "OverlapReport",
    "audit_geographic_overlap",
    "MetricConfig",
    "MetricReport",
    "evaluate",
    "ols_l",
    "SceneGraph",
    "score_remap",
    "top_ll",
]

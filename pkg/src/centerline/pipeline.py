"""Instance-level glue between extraction, reconstruction and fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import sample_bezier
from .errors import CenterlineError
from .extraction import CenterlineInstance, extract_points
from .grid import QuadDirection
from .reconstruction import ReconstructionConfig, fuse_outputs, reconstruct_curve

__all__ = ["InstanceResult", "orient_like", "reconstruct_instance", "reconstruct_safe"]


@dataclass
class InstanceResult:
    id: str
    polyline: np.ndarray | None
    info: dict
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def orient_like(points, direction) -> np.ndarray:
    """Reverse ``points`` if they run against the flow of ``direction``."""
    direction = QuadDirection.parse(direction)
    pts = np.asarray(points, dtype=float)
    axis = 0 if direction.vertical else 1
    sign = 1.0 if direction in (QuadDirection.UP, QuadDirection.RIGHT) else -1.0
    if sign * (pts[-1, axis] - pts[0, axis]) < 0:
        return pts[::-1].copy()
    return pts


def reconstruct_instance(
    inst: CenterlineInstance,
    tau: float = 0.95,
    proposal: str = "multi",
    cfg: ReconstructionConfig = ReconstructionConfig(),
    fuse: bool = False,
    bezier_spacing: str = "uniform",
):
    """Mask path for one instance, optionally averaged with its Bezier path."""
    pts = extract_points(inst, tau, proposal)
    curve, info = reconstruct_curve(pts, inst.direction, inst.spec, cfg)
    info = dict(info, proposal=pts.provenance, fused=False)
    if fuse and inst.bezier_cp is not None:
        bez = orient_like(sample_bezier(inst.bezier_cp, cfg.n_output_points, bezier_spacing), inst.direction)
        curve = fuse_outputs(curve, bez)
        info["fused"] = True
    return curve, info


def reconstruct_safe(inst: CenterlineInstance, **kwargs) -> InstanceResult:
    try:
        curve, info = reconstruct_instance(inst, **kwargs)
    except CenterlineError as exc:
        return InstanceResult(inst.id, None, {}, f"{type(exc).__name__}: {exc}")
    return InstanceResult(inst.id, curve, info)

"""Supervision targets and loss terms for mask-based centerline heads."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyBand, EmptyMaskWarning, InvalidInput
from .grid import GridSpec, QuadDirection, as_polyline, project_points, world_to_grid

__all__ = [
    "TargetBundle",
    "LossWeights",
    "quad_direction_label",
    "rasterize_centerline",
    "target_offset_field",
    "target_height_field",
    "build_targets",
    "offset_loss",
    "height_loss",
    "mask_loss",
    "bezier_l1",
    "match_cost",
    "PROB_EPS",
]

PROB_EPS = 1e-7


@dataclass(frozen=True)
class TargetBundle:
    """Per-instance targets.  Offsets are in grid cells, heights normalized."""

    spec: GridSpec
    mask: np.ndarray  # (H, W) {0, 1}
    offset: np.ndarray  # (H, W, 2)
    height: np.ndarray  # (H, W) in [0, 1]
    fg_band: np.ndarray  # (H, W) {0, 1}
    direction: QuadDirection

    @property
    def empty(self) -> bool:
        return not self.mask.any()


@dataclass(frozen=True)
class LossWeights:
    lambda_cls: float = 2.0
    lambda_reg: float = 5.0
    lambda_mask_bce: float = 5.0
    lambda_mask_dice: float = 5.0
    lambda_offset: float = 20.0
    lambda_height: float = 50.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value >= 0:
                raise InvalidInput(f"{name} must be >= 0")


def _sector(dx, dy) -> QuadDirection:
    if abs(dx) >= abs(dy):
        return QuadDirection.UP if dx > 0 else QuadDirection.DOWN
    return QuadDirection.RIGHT if dy > 0 else QuadDirection.LEFT


def quad_direction_label(c) -> QuadDirection:
    """Majority vote of per-step flow sectors; ties fall back to start->end."""
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] < 2 or c.shape[1] < 2:
        raise InvalidInput("need at least 2 points")
    deltas = np.diff(c[:, :2], axis=0)
    deltas = deltas[np.any(deltas != 0.0, axis=1)]
    if len(deltas) == 0:
        raise InvalidInput("degenerate polyline: no planar motion")
    votes = {d: 0 for d in QuadDirection}
    for dx, dy in deltas:
        votes[_sector(dx, dy)] += 1
    top = max(votes.values())
    leaders = [d for d, v in votes.items() if v == top]
    if len(leaders) == 1:
        return leaders[0]
    dx, dy = c[-1, :2] - c[0, :2]
    if dx == 0.0 and dy == 0.0:
        raise InvalidInput("degenerate polyline: tie with closed start/end")
    return _sector(dx, dy)


def _cell_centers(spec: GridSpec) -> np.ndarray:
    ii, jj = np.meshgrid(
        np.arange(spec.height_cells, dtype=float),
        np.arange(spec.width_cells, dtype=float),
        indexing="ij",
    )
    return np.stack([ii.ravel(), jj.ravel()], axis=1)


def _project_grid(c, spec: GridSpec):
    curve = world_to_grid(spec, as_polyline(c))
    closest, _, dist = project_points(curve, _cell_centers(spec))
    return closest, dist


def rasterize_centerline(c, spec: GridSpec, width_cells: int = 4) -> np.ndarray:
    """Binary mask of cells whose center lies closer than width/2 to the curve.

    Distances are planar, in grid units.  An all-zero result emits
    :class:`EmptyMaskWarning`.
    """
    if width_cells < 1:
        raise InvalidInput("width_cells must be >= 1")
    _, dist = _project_grid(c, spec)
    mask = (dist < width_cells / 2.0).astype(float).reshape(spec.shape)
    if not mask.any():
        warnings.warn("centerline does not touch the grid", EmptyMaskWarning, stacklevel=2)
    return mask


def target_offset_field(c, spec: GridSpec, band_radius_cells: float = 4.0):
    """Dense offsets (grid cells) from each cell to its closest curve point.

    Returns ``(offset, fg_band)``.  Offsets are filled everywhere; the band
    marks cells with offset norm strictly below ``band_radius_cells``.
    """
    if not band_radius_cells > 0:
        raise InvalidInput("band_radius_cells must be positive")
    closest, _ = _project_grid(c, spec)
    offset = closest[:, :2] - _cell_centers(spec)
    norm = np.linalg.norm(offset, axis=1)
    band = (norm < band_radius_cells).astype(float)
    return offset.reshape(spec.shape + (2,)), band.reshape(spec.shape)


def target_height_field(c, spec: GridSpec, band_radius_cells: float = 4.0) -> np.ndarray:
    """Normalized height of the closest curve point, 0.5 outside the band."""
    if not band_radius_cells > 0:
        raise InvalidInput("band_radius_cells must be positive")
    closest, _ = _project_grid(c, spec)
    offset = closest[:, :2] - _cell_centers(spec)
    in_band = np.linalg.norm(offset, axis=1) < band_radius_cells
    height = np.where(in_band, np.clip(closest[:, 2], 0.0, 1.0), 0.5)
    return height.reshape(spec.shape)


def build_targets(c, spec: GridSpec, width_cells: int = 4, band_radius_cells: float = 4.0) -> TargetBundle:
    """All targets for one centerline with a single projection pass."""
    c = as_polyline(c)
    if width_cells < 1:
        raise InvalidInput("width_cells must be >= 1")
    if not band_radius_cells > 0:
        raise InvalidInput("band_radius_cells must be positive")
    closest, dist = _project_grid(c, spec)
    offset = closest[:, :2] - _cell_centers(spec)
    in_band = np.linalg.norm(offset, axis=1) < band_radius_cells
    shape = spec.shape
    return TargetBundle(
        spec=spec,
        mask=(dist < width_cells / 2.0).astype(float).reshape(shape),
        offset=offset.reshape(shape + (2,)),
        height=np.where(in_band, np.clip(closest[:, 2], 0.0, 1.0), 0.5).reshape(shape),
        fg_band=in_band.astype(float).reshape(shape),
        direction=quad_direction_label(c),
    )


def _band_total(fg_band) -> float:
    total = float(np.sum(fg_band))
    if total <= 0:
        raise EmptyBand("supervision band has no active cells")
    return total


def offset_loss(pred, target, fg_band) -> float:
    """Masked L1 over both offset channels, normalized by band size."""
    pred, target, fg_band = (np.asarray(a, dtype=float) for a in (pred, target, fg_band))
    if pred.shape != target.shape or pred.shape[:2] != fg_band.shape:
        raise InvalidInput("shape mismatch")
    per_cell = np.abs(pred - target).sum(axis=-1)
    return float(np.sum(per_cell * fg_band) / _band_total(fg_band))


def height_loss(pred, target, fg_band) -> float:
    pred, target, fg_band = (np.asarray(a, dtype=float) for a in (pred, target, fg_band))
    if pred.shape != target.shape or pred.shape != fg_band.shape:
        raise InvalidInput("shape mismatch")
    return float(np.sum(np.abs(pred - target) * fg_band) / _band_total(fg_band))


def mask_loss(pred_prob, gt_mask) -> tuple[float, float]:
    """Dense ``(bce, dice)`` over the whole grid.

    Probabilities are clamped to ``[1e-7, 1 - 1e-7]`` inside the log only;
    Dice uses them as given, so it is exactly zero at a binary truth.
    """
    p = np.asarray(pred_prob, dtype=float)
    g = np.asarray(gt_mask, dtype=float)
    if p.shape != g.shape:
        raise InvalidInput("shape mismatch")
    q = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    bce = -np.mean(g * np.log(q) + (1.0 - g) * np.log(1.0 - q))
    denom = p.sum() + g.sum()
    dice = 1.0 - 2.0 * np.sum(p * g) / denom if denom > 0 else 0.0
    return float(bce), float(dice)


def bezier_l1(pred_cp, gt_cp) -> float:
    """Sum over control points of the per-point L1 distance."""
    a = np.asarray(pred_cp, dtype=float)
    b = np.asarray(gt_cp, dtype=float)
    if a.shape != b.shape:
        raise InvalidInput("control point shape mismatch")
    return float(np.abs(a - b).sum())


def match_cost(
    class_prob: float,
    pred_prob,
    gt_mask,
    w: LossWeights = LossWeights(),
    pred_cp=None,
    gt_cp=None,
) -> float:
    """Bipartite matcher cost between one prediction and one GT instance.

    ``class_prob`` is the prediction's probability for the GT's direction
    class.  Zero weights drop their term entirely (and its inputs are not
    needed), so ``lambda_reg=0`` gives the mask matcher and zero mask
    weights give the L1 matcher.
    """
    if not 0.0 <= class_prob <= 1.0:
        raise InvalidInput("class_prob must lie in [0, 1]")
    cost = w.lambda_cls * (1.0 - class_prob)
    if w.lambda_reg > 0:
        if pred_cp is None or gt_cp is None:
            raise InvalidInput("control points required when lambda_reg > 0")
        cost += w.lambda_reg * bezier_l1(pred_cp, gt_cp)
    if w.lambda_mask_bce > 0 or w.lambda_mask_dice > 0:
        bce, dice = mask_loss(pred_prob, gt_mask)
        cost += w.lambda_mask_bce * bce + w.lambda_mask_dice * dice
    return float(cost)

"""Direction-aware curve regularization: fit, resample, order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, ReconstructionFailed
from .grid import GridSpec, QuadDirection, arc_length_resample, grid_to_world

__all__ = [
    "ReconstructionConfig",
    "PathPolynomial",
    "HeightSurface",
    "fit_path_polynomial",
    "fit_height_surface",
    "reconstruct_curve",
    "sort_by_direction",
    "fuse_outputs",
]

# relative singular-value cutoff for the height surface solve
_SURFACE_RCOND = 1e-6


@dataclass(frozen=True)
class ReconstructionConfig:
    path_poly_order: int = 4
    height_poly_order: int = 3
    n_output_points: int = 11
    presample_count: int = 100
    # widen the presample span past the observed abscissae (meters)
    span_margin_m: float = 0.0

    def __post_init__(self):
        if self.path_poly_order < 1:
            raise InvalidInput("path_poly_order must be >= 1")
        if self.height_poly_order < 0:
            raise InvalidInput("height_poly_order must be >= 0")
        if self.n_output_points < 2:
            raise InvalidInput("n_output_points must be >= 2")
        if self.presample_count < self.n_output_points:
            raise InvalidInput("presample_count must be >= n_output_points")
        if not self.span_margin_m >= 0:
            raise InvalidInput("span_margin_m must be >= 0")


def _normalization(values: np.ndarray) -> tuple[float, float]:
    lo, hi = float(values.min()), float(values.max())
    center = 0.5 * (lo + hi)
    scale = 0.5 * (hi - lo)
    return center, (scale if scale > 0 else 1.0)


@dataclass(frozen=True)
class PathPolynomial:
    """``dep = sum(coef[k] * u**k)`` with ``u = (indep - center) / scale``.

    The independent variable is world x for vertical directions, y otherwise.
    """

    coef: np.ndarray
    center: float
    scale: float
    vertical: bool
    requested_order: int

    @property
    def order(self) -> int:
        return len(self.coef) - 1

    @property
    def order_reduced(self) -> bool:
        return self.order < self.requested_order

    def __call__(self, indep):
        u = (np.asarray(indep, dtype=float) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(u, self.coef)


def fit_path_polynomial(points, direction, order: int = 4) -> PathPolynomial:
    """Least-squares ``y = f(x)`` (up/down) or ``x = f(y)`` (left/right).

    With fewer than ``order + 1`` distinct abscissae the order drops to the
    largest one the data supports; see ``PathPolynomial.order_reduced``.
    """
    direction = QuadDirection.parse(direction)
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(xy) == 0:
        raise InvalidInput("no points to fit")
    if order < 0:
        raise InvalidInput("order must be >= 0")
    if not np.all(np.isfinite(xy)):
        raise InvalidInput("points must be finite")
    indep, dep = (xy[:, 0], xy[:, 1]) if direction.vertical else (xy[:, 1], xy[:, 0])
    center, scale = _normalization(indep)
    u = (indep - center) / scale

    feasible = min(order, len(np.unique(indep)) - 1)
    while True:
        vander = np.polynomial.polynomial.polyvander(u, feasible)
        coef, _, rank, _ = np.linalg.lstsq(vander, dep, rcond=None)
        if rank == feasible + 1 or feasible == 0:
            break
        feasible = rank - 1
    return PathPolynomial(coef, center, scale, direction.vertical, order)


@dataclass(frozen=True)
class HeightSurface:
    """Separable surface ``z = C0 + sum_k (C[2k-1] x**k + C[2k] y**k)``.

    ``coefficients`` are in raw world meters; evaluation uses the internal
    normalized form for conditioning.
    """

    coefficients: np.ndarray
    order: int
    rank: int
    _norm_coef: np.ndarray
    _cx: float
    _sx: float
    _cy: float
    _sy: float

    @property
    def order_reduced(self) -> bool:
        return self.rank < len(self.coefficients)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return _surface_design((x - self._cx) / self._sx, (y - self._cy) / self._sy, self.order) @ self._norm_coef


def _surface_design(ux, uy, order):
    cols = [np.ones_like(ux)]
    for k in range(1, order + 1):
        cols.append(ux**k)
        cols.append(uy**k)
    return np.stack(cols, axis=-1)


def _to_raw_powers(norm_coef: np.ndarray, center: float, scale: float) -> np.ndarray:
    # coefficients of sum_k a_k ((t - c) / s)^k as powers of t
    P = np.polynomial.Polynomial
    base = P([-center / scale, 1.0 / scale])
    total = P([0.0])
    for k, a in enumerate(norm_coef):
        total = total + a * base**k
    out = np.zeros(len(norm_coef))
    out[: len(total.coef)] = total.coef[: len(norm_coef)]
    return out


def fit_height_surface(points, order: int = 3) -> HeightSurface:
    """Least-squares separable polynomial surface through ``(x, y, z)`` points.

    Rank-deficient designs (points on a curve, repeated coordinates) are
    solved in the minimum-norm sense; ``order_reduced`` reports it.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise InvalidInput("no points to fit")
    if not np.all(np.isfinite(pts)):
        raise InvalidInput("points must be finite")
    cx, sx = _normalization(pts[:, 0])
    cy, sy = _normalization(pts[:, 1])
    design = _surface_design((pts[:, 0] - cx) / sx, (pts[:, 1] - cy) / sy, order)
    norm_coef, _, rank, _ = np.linalg.lstsq(design, pts[:, 2], rcond=_SURFACE_RCOND)

    ax = np.concatenate([[0.0], norm_coef[1::2]])
    ay = np.concatenate([[0.0], norm_coef[2::2]])
    rx = _to_raw_powers(ax, cx, sx)
    ry = _to_raw_powers(ay, cy, sy)
    raw = np.zeros(1 + 2 * order)
    raw[0] = norm_coef[0] + rx[0] + ry[0]
    raw[1::2] = rx[1:]
    raw[2::2] = ry[1:]
    return HeightSurface(raw, order, int(rank), norm_coef, cx, sx, cy, sy)


def sort_by_direction(points, direction) -> np.ndarray:
    """Order points along the flow: up +x, down -x, right +y, left -y."""
    direction = QuadDirection.parse(direction)
    pts = np.asarray(points, dtype=float)
    key = pts[:, 0] if direction.vertical else pts[:, 1]
    if direction in (QuadDirection.DOWN, QuadDirection.LEFT):
        key = -key
    return pts[np.argsort(key, kind="stable")]


def reconstruct_curve(points, direction, spec: GridSpec, cfg: ReconstructionConfig = ReconstructionConfig()):
    """Grid points ``(i, j, h_norm)`` to an ordered, arc-equidistant 3D polyline.

    Returns ``(polyline, info)`` where ``info`` records the fitted orders.
    """
    direction = QuadDirection.parse(direction)
    grid_pts = getattr(points, "points", points)
    grid_pts = np.asarray(grid_pts, dtype=float).reshape(-1, 3)
    grid_pts = grid_pts[np.all(np.isfinite(grid_pts), axis=1)]
    if len(grid_pts) < 2:
        raise ReconstructionFailed(f"only {len(grid_pts)} usable points")
    world = grid_to_world(spec, grid_pts)
    indep = world[:, 0] if direction.vertical else world[:, 1]
    if np.unique(indep).size < 2:
        raise ReconstructionFailed("points share a single abscissa along the flow axis")

    path = fit_path_polynomial(world[:, :2], direction, cfg.path_poly_order)
    surface = fit_height_surface(world, cfg.height_poly_order)

    lo, hi = indep.min() - cfg.span_margin_m, indep.max() + cfg.span_margin_m
    u = np.linspace(lo, hi, cfg.presample_count)
    v = path(u)
    x, y = (u, v) if direction.vertical else (v, u)
    pre = np.stack([x, y, surface(x, y)], axis=1)
    if not np.all(np.isfinite(pre)):
        raise ReconstructionFailed("fit produced non-finite samples")
    curve = arc_length_resample(pre, cfg.n_output_points)
    # resampled points sit on chords of the presample; move them back onto the fit
    u = curve[:, 0] if direction.vertical else curve[:, 1]
    curve[:, 1 if direction.vertical else 0] = path(u)
    curve[:, 2] = surface(curve[:, 0], curve[:, 1])
    curve = sort_by_direction(curve, direction)
    info = {
        "n_input": len(grid_pts),
        "path_order": path.order,
        "path_order_reduced": path.order_reduced,
        "height_rank": surface.rank,
        "height_order_reduced": surface.order_reduced,
    }
    return curve, info


def fuse_outputs(mask_pts, bezier_pts) -> np.ndarray:
    """Element-wise midpoint of two equally sized, equally ordered point sets."""
    m = np.asarray(mask_pts, dtype=float)
    b = np.asarray(bezier_pts, dtype=float)
    if m.shape != b.shape or m.ndim != 2 or m.shape[1] != 3:
        raise InvalidInput(f"cannot fuse shapes {m.shape} and {b.shape}")
    return 0.5 * (m + b)

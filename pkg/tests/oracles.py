"""Independent reference implementations used as test oracles."""

import math

import numpy as np


def seg_point_dist2d(p, a, b):
    """Independent planar point-to-segment distance (plain Python)."""
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0:
        return ((px - ax) ** 2 + (py - ay) ** 2) ** 0.5
    t = max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / L2))
    qx, qy = ax + t * dx, ay + t * dy
    return ((px - qx) ** 2 + (py - qy) ** 2) ** 0.5


def polyline_dist2d(p, poly):
    return min(seg_point_dist2d(p, poly[k][:2], poly[k + 1][:2]) for k in range(len(poly) - 1))


def dense_samples(poly, step):
    """Points along a polyline every ``step`` units of arc length (3D)."""
    poly = np.asarray(poly, dtype=float)
    out = []
    for a, b in zip(poly[:-1], poly[1:]):
        n = max(1, int(np.ceil(np.linalg.norm(b - a) / step)))
        t = np.linspace(0.0, 1.0, n + 1)[:-1]
        out.append(a + t[:, None] * (b - a))
    out.append(poly[-1:])
    return np.concatenate(out)


def closest_with_z(p, poly):
    """Planar closest point on a polyline and its interpolated z (first minimum wins)."""
    best = None
    for k in range(len(poly) - 1):
        a, b = poly[k], poly[k + 1]
        dx, dy = b[0] - a[0], b[1] - a[1]
        L2 = dx * dx + dy * dy
        t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2))
        qx, qy = a[0] + t * dx, a[1] + t * dy
        d = ((p[0] - qx) ** 2 + (p[1] - qy) ** 2) ** 0.5
        if best is None or d < best[0]:
            best = (d, a[2] + t * (b[2] - a[2]))
    return best


def naive_offset_loss(pred, tgt, band):
    num = den = 0.0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            if band[i, j]:
                num += abs(pred[i, j, 0] - tgt[i, j, 0]) + abs(pred[i, j, 1] - tgt[i, j, 1])
                den += 1
    return num / den


def naive_height_loss(pred, tgt, band):
    num = den = 0.0
    for i in range(pred.shape[0]):
        for j in range(pred.shape[1]):
            if band[i, j]:
                num += abs(pred[i, j] - tgt[i, j])
                den += 1
    return num / den


def naive_mask_loss(p, g):
    eps = 1e-7
    n = 0
    bce = inter = sp = sg = 0.0
    for i in range(p.shape[0]):
        for j in range(p.shape[1]):
            q = min(max(p[i, j], eps), 1 - eps)
            bce += -(g[i, j] * math.log(q) + (1 - g[i, j]) * math.log(1 - q))
            inter += p[i, j] * g[i, j]
            sp += p[i, j]
            sg += g[i, j]
            n += 1
    return bce / n, 1 - 2 * inter / (sp + sg)

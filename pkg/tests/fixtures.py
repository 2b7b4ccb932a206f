"""Hand-built metric fixtures shared by unit, CLI and acceptance tests."""

import numpy as np

from centerline.metrics import SceneGraph


def segment(y, x0=0.0, x1=10.0, z=0.0, n=11):
    x = np.linspace(x0, x1, n)
    return np.column_stack([x, np.full(n, y), np.full(n, z)])


# two GT segments 20 m apart; preds sit at lateral offsets 0.4 (GT0),
# 1.2 (GT0 again) and 2.5 (GT1) with confidences 0.9, 0.8, 0.7
DET_GTS = [segment(0.0), segment(20.0)]
DET_PREDS = [(segment(0.4), 0.9), (segment(-1.2), 0.8), (segment(17.5), 0.7)]
DET_THRESHOLDS = (1.0, 2.0, 3.0)
# hand PR tabulation, ranked 0.9, 0.8, 0.7:
#   theta 1: TP FP FP -> P (1, 1/2, 1/3), R (1/2, 1/2, 1/2) -> AP 1/2
#   theta 2: TP FP FP (second pred's GT already taken; third at 2.5 > 2) -> AP 1/2
#   theta 3: TP FP TP -> P (1, 1/2, 2/3), R (1/2, 1/2, 1) -> AP 1/2 + 1/2 * 2/3
DET_EXPECTED = {1.0: 50.0, 2.0: 50.0, 3.0: 100.0 * (0.5 + 0.5 * 2 / 3)}
DET_EXPECTED_MEAN = sum(DET_EXPECTED.values()) / 3


def edge_scene(edge_conf):
    """GT A->B and a prediction matching both vertices exactly."""
    verts = {"A": (segment(0.0), 1.0), "B": (segment(0.0, 10.0, 20.0), 1.0)}
    gt = SceneGraph(dict(verts), [("A", "B", 1.0)])
    pred = SceneGraph(dict(verts), [("A", "B", edge_conf)])
    return pred, gt


def three_vertex_scene():
    """GT A->B; prediction has true A->B at 0.6 and false A->C at 0.7.

    A-out ranks C then B: precision at the hit is 1/2 -> AP 0.5.
    B-in has the single candidate A -> AP 1.  Everything else undefined.
    """
    verts = {
        "A": (segment(0.0), 1.0),
        "B": (segment(0.0, 10.0, 20.0), 1.0),
        "C": (segment(30.0), 1.0),
    }
    gt = SceneGraph(dict(verts), [("A", "B", 1.0)])
    pred = SceneGraph(dict(verts), [("A", "B", 0.6), ("A", "C", 0.7)])
    return pred, gt


THREE_VERTEX_EXPECTED = 75.0

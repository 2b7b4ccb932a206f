import itertools
import math

import numpy as np
import pytest

from centerline.errors import EmptyBand, EmptyMaskWarning, InvalidInput
from centerline.grid import GridSpec, QuadDirection, grid_to_world
from centerline.metrics import hungarian
from centerline.targets import (
    LossWeights,
    build_targets,
    height_loss,
    mask_loss,
    match_cost,
    offset_loss,
    quad_direction_label,
    rasterize_centerline,
    target_height_field,
    target_offset_field,
)

from .oracles import naive_height_loss, naive_mask_loss, naive_offset_loss, polyline_dist2d, seg_point_dist2d


def test_direction_up():
    x = np.linspace(0, 10, 11)
    pts = np.stack([x, 0.05 * x, 0 * x], axis=1)
    assert quad_direction_label(pts) is QuadDirection.UP


def test_direction_left():
    assert quad_direction_label([(0, 0, 0), (0, -10, 0)]) is QuadDirection.LEFT


def test_direction_tie_breaks_on_endpoints():
    # deltas by hand: five (+1, 0) steps -> Up votes, five (0, +1) steps -> Right votes
    pts = [(k, 0, 0) for k in range(6)] + [(5, k, 0) for k in range(1, 6)]
    deltas = np.diff(np.array(pts, dtype=float)[:, :2], axis=0)
    assert sum(1 for dx, dy in deltas if abs(dx) >= abs(dy) and dx > 0) == 5
    assert sum(1 for dx, dy in deltas if abs(dy) > abs(dx) and dy > 0) == 5
    # start->end is (5, 5): |dx| >= |dy| with dx > 0
    assert quad_direction_label(pts) is QuadDirection.UP


@pytest.mark.parametrize(
    "pts, expected",
    [
        ([(0, 0, 0), (-3, 1, 0)], QuadDirection.DOWN),
        ([(0, 0, 0), (1, 3, 0)], QuadDirection.RIGHT),
        ([(0, 0, 0), (2, 2, 0)], QuadDirection.UP),
        ([(0, 0, 0), (-2, -2, 0)], QuadDirection.DOWN),
    ],
)
def test_direction_sectors(pts, expected):
    assert quad_direction_label(pts) is expected


def test_direction_degenerate():
    with pytest.raises(InvalidInput):
        quad_direction_label([(1, 1, 0), (1, 1, 5)])


def _grid_line(spec, start_ij, end_ij, h=0.5):
    return grid_to_world(spec, [(start_ij[0], start_ij[1], h), (end_ij[0], end_ij[1], h)])


def test_rasterize_vertical_line(unit_spec):
    line = _grid_line(unit_spec, (-5, 4.0), (45, 4.0))
    mask = rasterize_centerline(line, unit_spec, 4)
    cols = np.nonzero(mask.any(axis=0))[0]
    assert cols.tolist() == [3, 4, 5]
    assert np.all(mask[:, [3, 4, 5]] == 1)


def test_rasterize_off_grid_warns(unit_spec):
    line = _grid_line(unit_spec, (100, 100), (120, 130))
    with pytest.warns(EmptyMaskWarning):
        mask = rasterize_centerline(line, unit_spec, 4)
    assert not mask.any()


def test_rasterize_diagonal_matches_bruteforce():
    spec = GridSpec(height_cells=20, width_cells=20, cell_size_m=1.0, origin_world=(0.0, 0.0))
    line = [(0.0, 0.0, 0.0), (19.0, 19.0, 0.0)]
    mask = rasterize_centerline(line, spec, 4)
    expected = 0
    for i in range(20):
        for j in range(20):
            inside = seg_point_dist2d((i, j), line[0][:2], line[1][:2]) < 2.0
            expected += inside
            assert mask[i, j] == inside
    assert mask.sum() == expected


def test_rasterize_mirror_symmetry():
    spec = GridSpec(height_cells=30, width_cells=24, cell_size_m=1.0, origin_world=(0.0, 0.0))
    rng = np.random.default_rng(11)
    for _ in range(20):
        pts = np.column_stack([np.sort(rng.uniform(0, 29, 6)), rng.uniform(2, 21, 6), np.zeros(6)])
        mirrored = pts.copy()
        mirrored[:, 1] = (spec.width_cells - 1) - pts[:, 1]
        a = rasterize_centerline(pts, spec, 4)
        b = rasterize_centerline(mirrored, spec, 4)
        assert np.array_equal(a[:, ::-1], b)


def test_offset_axis_aligned(unit_spec):
    line = _grid_line(unit_spec, (-5, 4.3), (45, 4.3))
    offset, band = target_offset_field(line, unit_spec, 4)
    np.testing.assert_allclose(offset[10, 4], (0.0, 0.3), atol=1e-12)
    np.testing.assert_allclose(offset[10, 6], (0.0, -1.7), atol=1e-12)
    assert band[10, 6] == 1
    assert band[10, 9] == 0  # 4.7 cells away


def _curve(spec_size=40, seed=0):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 1, 40)
    x = 3 + 34 * t
    amp, freq, phase = rng.uniform(2, 6), rng.uniform(0.5, 1.5), rng.uniform(0, np.pi)
    y = 20 + amp * np.sin(2 * np.pi * freq * t + phase)
    z = rng.uniform(-3, 3) + rng.uniform(-2, 2) * t
    return np.stack([x, y, z], axis=1)


def test_offset_curved_matches_segment_oracle(unit_spec):
    curve = _curve()
    offset, band = target_offset_field(curve, unit_spec, 4)
    for i, j in zip(*np.nonzero(band)):
        d_oracle = polyline_dist2d((i, j), curve)
        assert abs(np.linalg.norm(offset[i, j]) - d_oracle) < 1e-6
        # the target point lies on the curve
        target = (i + offset[i, j, 0], j + offset[i, j, 1])
        assert polyline_dist2d(target, curve) < 1e-6


def test_band_consistency(unit_spec):
    tb = build_targets(_curve(seed=3), unit_spec, 4, 4)
    norm = np.linalg.norm(tb.offset, axis=-1)
    assert np.array_equal(tb.fg_band == 1, norm < 4)
    # width-4 mask sits inside the radius-4 band
    assert np.all(tb.fg_band[tb.mask == 1] == 1)


def test_height_constant(unit_spec):
    flat = _grid_line(unit_spec, (0, 10), (39, 10))
    h = target_height_field(flat, unit_spec, 4)
    _, band = target_offset_field(flat, unit_spec, 4)
    assert np.all(h[band == 1] == 0.5)
    assert np.all(h[band == 0] == 0.5)
    high = flat.copy()
    high[:, 2] = 10.0
    h = target_height_field(high, unit_spec, 4)
    assert np.all(h[band == 1] == 1.0)


def test_height_ramp_matches_projection_oracle(unit_spec):
    ramp = np.array([(2.0, 5.0, 0.0), (37.0, 30.0, 5.0)])
    h = target_height_field(ramp, unit_spec, 4)
    _, band = target_offset_field(ramp, unit_spec, 4)
    a, b = ramp[0], ramp[1]
    ab = b[:2] - a[:2]
    for i, j in zip(*np.nonzero(band)):
        t = min(1.0, max(0.0, np.dot(np.array([i, j]) - a[:2], ab) / np.dot(ab, ab)))
        z = a[2] + t * (b[2] - a[2])
        assert abs(h[i, j] - (z + 10.0) / 20.0) < 1e-6


def test_build_targets_consistent_with_individual_ops(unit_spec):
    c = _curve(seed=7)
    tb = build_targets(c, unit_spec, 4, 4)
    off, band = target_offset_field(c, unit_spec, 4)
    assert np.array_equal(tb.offset, off)
    assert np.array_equal(tb.fg_band, band)
    assert np.array_equal(tb.height, target_height_field(c, unit_spec, 4))
    assert np.array_equal(tb.mask, rasterize_centerline(c, unit_spec, 4))
    assert 0 <= tb.height.min() and tb.height.max() <= 1


# -- losses ------------------------------------------------------------------


def test_offset_loss_examples():
    rng = np.random.default_rng(0)
    tgt = rng.normal(size=(8, 8, 2))
    band = (rng.uniform(size=(8, 8)) < 0.5).astype(float)
    band[0, 0] = 1
    assert offset_loss(tgt, tgt, band) == 0.0
    assert offset_loss(tgt + np.array([1.0, 0.0]), tgt, band) == pytest.approx(1.0, abs=1e-12)
    pred = rng.normal(size=(8, 8, 2))
    assert offset_loss(pred, tgt, band) == pytest.approx(naive_offset_loss(pred, tgt, band), abs=1e-12)


def test_height_loss_examples():
    rng = np.random.default_rng(1)
    tgt = rng.uniform(size=(8, 8))
    band = (rng.uniform(size=(8, 8)) < 0.5).astype(float)
    band[3, 3] = 1
    assert height_loss(tgt, tgt, band) == 0.0
    assert height_loss(tgt + 0.25, tgt, band) == pytest.approx(0.25, abs=1e-12)
    pred = rng.uniform(size=(8, 8))
    assert height_loss(pred, tgt, band) == pytest.approx(naive_height_loss(pred, tgt, band), abs=1e-12)


def test_empty_band_raises():
    z = np.zeros((4, 4))
    with pytest.raises(EmptyBand):
        height_loss(z, z, z)
    with pytest.raises(EmptyBand):
        offset_loss(np.zeros((4, 4, 2)), np.zeros((4, 4, 2)), z)


def test_mask_loss_examples():
    rng = np.random.default_rng(2)
    g = (rng.uniform(size=(6, 6)) < 0.4).astype(float)
    p = np.where(g == 1, 1 - 1e-7, 1e-7)
    bce, dice = mask_loss(p, g)
    assert bce < 1e-6 and dice < 1e-6
    bce, _ = mask_loss(np.full((6, 6), 0.5), g)
    assert bce == pytest.approx(math.log(2), abs=1e-12)
    p = rng.uniform(size=(6, 6))
    bce, dice = mask_loss(p, g)
    nb, nd = naive_mask_loss(p, g)
    assert bce == pytest.approx(nb, abs=1e-9)
    assert dice == pytest.approx(nd, abs=1e-9)


def test_losses_zero_at_truth_on_real_targets(unit_spec):
    tb = build_targets(_curve(seed=4), unit_spec)
    assert offset_loss(tb.offset, tb.offset, tb.fg_band) == 0.0
    assert height_loss(tb.height, tb.height, tb.fg_band) == 0.0
    bce, dice = mask_loss(tb.mask, tb.mask)
    assert bce < 1e-6 and dice == 0.0


# -- matcher cost ------------------------------------------------------------


def test_match_cost_identical_is_zero():
    rng = np.random.default_rng(3)
    g = (rng.uniform(size=(6, 6)) < 0.3).astype(float)
    cp = rng.normal(size=(4, 3))
    assert match_cost(1.0, g, g, LossWeights(), cp, cp) < 1e-5


def test_match_cost_reg_dropout():
    rng = np.random.default_rng(4)
    g = (rng.uniform(size=(6, 6)) < 0.3).astype(float)
    p = rng.uniform(size=(6, 6))
    w = LossWeights(lambda_reg=0.0)
    bce, dice = mask_loss(p, g)
    assert match_cost(0.0, p, g, w) == 2.0 + 5.0 * bce + 5.0 * dice
    with pytest.raises(InvalidInput):
        match_cost(0.5, p, g, LossWeights())


def test_match_cost_l1_only():
    cp = np.zeros((4, 3))
    w = LossWeights(lambda_mask_bce=0.0, lambda_mask_dice=0.0)
    assert match_cost(1.0, None, None, w, cp + 0.5, cp) == pytest.approx(5.0 * 12 * 0.5)


def test_match_cost_monotone_in_each_term():
    rng = np.random.default_rng(5)
    g = (rng.uniform(size=(6, 6)) < 0.3).astype(float)
    p = rng.uniform(0.2, 0.8, size=(6, 6))
    cp = rng.normal(size=(4, 3))
    base = match_cost(0.7, p, g, LossWeights(), cp + 0.1, cp)
    assert match_cost(0.6, p, g, LossWeights(), cp + 0.1, cp) >= base  # class term up
    assert match_cost(0.7, p, g, LossWeights(), cp + 0.2, cp) >= base  # reg term up
    worse = p.copy()
    worse[g == 1] *= 0.5  # lowers probability on foreground: BCE and Dice both rise
    assert match_cost(0.7, worse, g, LossWeights(), cp + 0.1, cp) >= base


def test_match_cost_assignment_vs_enumeration():
    rng = np.random.default_rng(6)
    gts = [(rng.uniform(size=(6, 6)) < 0.3).astype(float) for _ in range(3)]
    gcp = [rng.normal(size=(4, 3)) for _ in range(3)]
    preds = [np.clip(g + rng.normal(0, 0.3, g.shape), 0, 1) for g in gts[::-1]]
    pcp = [c + rng.normal(0, 0.2, c.shape) for c in gcp[::-1]]
    probs = rng.uniform(size=(3, 3))
    cost = np.array(
        [[match_cost(probs[r, c], preds[r], gts[c], LossWeights(), pcp[r], gcp[c]) for c in range(3)] for r in range(3)]
    )
    _, total = hungarian(cost)
    brute = min(sum(cost[r, perm[r]] for r in range(3)) for perm in itertools.permutations(range(3)))
    assert total == pytest.approx(brute, abs=1e-12)


def test_loss_weights_defaults():
    w = LossWeights()
    assert (w.lambda_cls, w.lambda_reg, w.lambda_mask_bce, w.lambda_mask_dice, w.lambda_offset, w.lambda_height) == (
        2,
        5,
        5,
        5,
        20,
        50,
    )
    with pytest.raises(InvalidInput):
        LossWeights(lambda_cls=-1)

"""Lane centerline targets, reconstruction and evaluation from the command line.

Exit codes: 0 ok, 1 semantic negative (overlapping split), 2 input error,
3 partial success (some instances skipped).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .errors import InvalidInput
from .extraction import PROPOSALS
from .io import (
    FormatError,
    Scene,
    SceneInstance,
    dumps_canonical,
    read_manifest,
    read_scene,
    write_grid,
    write_manifest,
    write_scene,
)
from .metrics import MetricConfig, audit_geographic_overlap, evaluate
from .pipeline import reconstruct_safe
from .reconstruction import ReconstructionConfig
from .synthetic import make_scene
from .targets import build_targets

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _safe_name(k: int, vid: str) -> str:
    return f"{k:03d}_" + re.sub(r"[^A-Za-z0-9_.-]", "_", vid)[:60]


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) in (None, [])]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


# -- targets -----------------------------------------------------------------


def run_targets(scene: Scene, out: Path, width: int, band: float) -> tuple[int, list]:
    """Write grids and manifest for every instance; returns (files written, off-grid ids)."""
    out.mkdir(parents=True, exist_ok=True)
    bundles = ordered_map(lambda inst: build_targets(inst.polyline, scene.spec, width, band), scene.instances)
    entries, off_grid, written = [], [], 0
    for k, (inst, tb) in enumerate(zip(scene.instances, bundles)):
        if tb.empty:
            off_grid.append(inst.id)
            continue
        stem = _safe_name(k, inst.id)
        files = {
            "prob": (f"{stem}.mask.grid", tb.mask),
            "offset": (f"{stem}.offset.grid", tb.offset),
            "height": (f"{stem}.height.grid", tb.height),
            "fg_band": (f"{stem}.fg_band.grid", tb.fg_band),
        }
        for name, arr in files.values():
            write_grid(out / name, arr, scene.spec)
            written += 1
        entry = {
            "id": inst.id,
            "direction": inst.direction.value,
            "confidence": inst.confidence,
            **{key: name for key, (name, _) in files.items()},
        }
        if inst.bezier_cp is not None:
            entry["bezier_cp"] = inst.bezier_cp.tolist()
        entries.append(entry)
    if entries:
        kept = {e["id"] for e in entries}
        edges = [e for e in scene.edges if e[0] in kept and e[1] in kept]
        write_manifest(out, scene.spec, entries, edges, scene.footprint)
    return written, off_grid


def cmd_targets(args) -> int:
    _require(args, "gt", "out")
    scene = read_scene(args.gt)
    if not scene.instances:
        _log("warning: scene has no instances; nothing written")
        return EXIT_OK
    written, off_grid = run_targets(scene, Path(args.out), args.width, args.band)
    for vid in off_grid:
        _log(f"instance {vid}: entirely off-grid, skipped")
    _log(f"wrote {written} grid files to {args.out}")
    return EXIT_PARTIAL if off_grid else EXIT_OK


# -- reconstruct -------------------------------------------------------------


def run_reconstruct(pred_dir, tau, proposal, cfg, fuse, bezier_spacing):
    spec, instances, edges, footprint = read_manifest(pred_dir)
    results = ordered_map(
        lambda inst: reconstruct_safe(inst, tau=tau, proposal=proposal, cfg=cfg, fuse=fuse, bezier_spacing=bezier_spacing),
        instances,
    )
    out_instances, failures = [], []
    for inst, res in zip(instances, results):
        if res.ok:
            out_instances.append(
                SceneInstance(inst.id, res.polyline, inst.class_confidence, inst.direction, inst.bezier_cp)
            )
        else:
            failures.append((inst.id, res.error))
    kept = {i.id for i in out_instances}
    edges = [e for e in edges if e[0] in kept and e[1] in kept]
    return Scene(spec, out_instances, edges, footprint), failures


def _recon_config(args) -> ReconstructionConfig:
    return ReconstructionConfig(
        path_poly_order=args.poly_order,
        height_poly_order=args.height_order,
        n_output_points=args.points,
        presample_count=max(args.presample, args.points),
    )


def cmd_reconstruct(args) -> int:
    _require(args, "pred", "out")
    if args.proposal not in PROPOSALS:
        raise UsageError(f"--proposal must be one of {PROPOSALS}")
    scene, failures = run_reconstruct(args.pred, args.tau, args.proposal, _recon_config(args), args.fuse, args.bezier_spacing)
    write_scene(args.out, scene)
    for vid, err in failures:
        _log(f"instance {vid}: {err}")
    return EXIT_PARTIAL if failures else EXIT_OK


# -- evaluate ----------------------------------------------------------------


def _metric_config(args) -> MetricConfig:
    return MetricConfig(
        ranking_threshold=args.ranking_threshold,
        remap_enabled=args.remap,
        det_matching=args.det_matching,
        top_strict=args.strict,
    )


def format_report(report) -> str:
    rows = [
        ("DET_l", report.det_l),
        ("DET_l_ch", report.det_l_ch),
        ("TOP_ll", report.top_ll),
        ("OLS_l", report.ols_l),
    ]
    for name, value in report.top_ll_variants.items():
        rows.append((f"TOP_ll[{name}]", value))
    width = max(len(r[0]) for r in rows)
    lines = [f"{name:<{width}}  {value:7.2f}" for name, value in rows]
    for label, per in (
        ("DET_l", report.det_l_per_threshold),
        ("DET_l_ch", report.det_l_ch_per_threshold),
        ("TOP_ll", report.top_ll_per_threshold),
    ):
        lines.append(f"{label} per threshold: " + "  ".join(f"{t:g}m={v:.2f}" for t, v in per.items()))
    return "\n".join(lines) + "\n"


def run_evaluate(pred_paths, gt_paths, cfg, with_variants):
    if len(pred_paths) != len(gt_paths):
        raise UsageError("--pred and --gt must be given the same number of times")
    pairs = [(read_scene(p).graph(), read_scene(g).graph()) for p, g in zip(pred_paths, gt_paths)]
    ids = [Path(g).stem for g in gt_paths]
    return evaluate(pairs, cfg, with_variants=with_variants, scene_ids=ids)


def cmd_evaluate(args) -> int:
    _require(args, "pred", "gt")
    report = run_evaluate(args.pred, args.gt, _metric_config(args), args.remap)
    if args.json:
        sys.stdout.write(dumps_canonical(report.to_dict()))
    else:
        sys.stdout.write(format_report(report))
    return EXIT_OK


# -- split-audit -------------------------------------------------------------


def _footprints(paths):
    out = []
    for p in paths:
        try:
            with open(p, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{p}: invalid JSON: {exc}") from None
        fp = doc.get("footprint") if isinstance(doc, dict) else None
        if fp is None:
            raise FormatError(f"{p}: no footprint")
        out.append(fp)
    return out


def cmd_split_audit(args) -> int:
    _require(args, "train", "val")
    report = audit_geographic_overlap(_footprints(args.train), _footprints(args.val))
    if args.json:
        sys.stdout.write(dumps_canonical(report.to_dict()))
    else:
        verdict = "DISJOINT" if report.disjoint else "OVERLAPPING"
        print(f"verdict: {verdict}")
        print(f"intersecting pairs: {report.intersecting_pairs}")
        print(f"intersection area m2: {report.total_intersection_area:.6f}")
        for t, v, area in report.pairs:
            print(f"  train {args.train[t]} x val {args.val[v]}: {area:.6f}")
    return EXIT_OK if report.disjoint else EXIT_NEGATIVE


# -- demo --------------------------------------------------------------------


def _dump_points(path: Path, pts) -> None:
    text = "".join(f"{x:.6f} {y:.6f} {z:.6f}\n" for x, y, z in np.asarray(pts))
    path.write_text(text, encoding="utf-8")


def cmd_demo(args) -> int:
    out = Path(args.out or f"demo_seed{args.seed}")
    out.mkdir(parents=True, exist_ok=True)
    gt = make_scene(args.seed, n_roads=args.roads)
    gt_path = out / "gt.json"
    write_scene(gt_path, gt)

    written, off_grid = run_targets(gt, out / "targets", args.width, args.band)
    if off_grid:
        _log(f"off-grid instances: {off_grid}")
    pred, failures = run_reconstruct(out / "targets", args.tau, args.proposal, _recon_config(args), args.fuse, args.bezier_spacing)
    pred_path = out / "pred.json"
    write_scene(pred_path, pred)
    for vid, err in failures:
        _log(f"instance {vid}: {err}")

    report = evaluate([(pred.graph(), gt.graph())], _metric_config(args), with_variants=True, scene_ids=["demo"])
    (out / "report.json").write_text(dumps_canonical(report.to_dict()), encoding="utf-8")
    (out / "report.txt").write_text(format_report(report), encoding="utf-8")

    points = out / "points"
    points.mkdir(exist_ok=True)
    for k, inst in enumerate(gt.instances):
        _dump_points(points / f"{_safe_name(k, inst.id)}.gt.txt", inst.polyline)
    for k, inst in enumerate(pred.instances):
        _dump_points(points / f"{_safe_name(k, inst.id)}.pred.txt", inst.polyline)
    sys.stdout.write(format_report(report))
    return EXIT_PARTIAL if failures or off_grid else EXIT_OK


# -- parser ------------------------------------------------------------------


def _add_recon_flags(p):
    p.add_argument("--tau", type=float, default=0.95, help="mask probability threshold")
    p.add_argument("--proposal", choices=PROPOSALS, default="multi")
    p.add_argument("--poly-order", type=int, default=4)
    p.add_argument("--height-order", type=int, default=3)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--presample", type=int, default=100)
    p.add_argument("--fuse", action="store_true", help="average with the Bezier path when present")
    p.add_argument("--bezier-spacing", choices=("uniform", "arc"), default="uniform")


def _add_metric_flags(p):
    p.add_argument("--ranking-threshold", type=float, default=0.5)
    p.add_argument("--remap", action="store_true", help="remap edge scores and report TOP_ll variants")
    p.add_argument("--det-matching", choices=("greedy", "hungarian"), default="greedy")
    p.add_argument("--strict", action="store_true", help="TOP_ll divides by 2|thresholds||V|")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="centerline", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="JSON file of option defaults; command-line flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("targets", help="generate supervision grids from a GT scene")
    p.add_argument("--gt")
    p.add_argument("--out")
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--band", type=float, default=4.0)
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("reconstruct", help="rebuild centerlines from prediction grids")
    p.add_argument("--pred", help="directory with manifest.json and grid files")
    p.add_argument("--out", help="output scene JSON")
    _add_recon_flags(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("evaluate", help="DET_l, DET_l_ch, TOP_ll and OLS_l")
    p.add_argument("--pred", action="append", help="prediction scene (repeat for more scenes)")
    p.add_argument("--gt", action="append", help="GT scene, paired with --pred by position")
    p.add_argument("--json", action="store_true")
    _add_metric_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split-audit", help="check train/val footprints for geographic overlap")
    p.add_argument("--train", nargs="+")
    p.add_argument("--val", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_split_audit)

    p = sub.add_parser("demo", help="synthetic end-to-end run")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--roads", type=int, default=3)
    p.add_argument("--width", type=int, default=4)
    p.add_argument("--band", type=float, default=4.0)
    _add_recon_flags(p)
    _add_metric_flags(p)
    p.set_defaults(func=cmd_demo, fuse=True)
    return parser


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    try:
        with open(known.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        config = _load_config(argv)
        if config:
            for action in parser._subparsers._group_actions:
                for sp in action.choices.values():
                    sp.set_defaults(**config)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT
    except (InvalidInput, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: synth, crop, tiles, anchors, detect, merge, eval, pipeline.
Every run echoes its effective config and streams progress to stderr; data
goes to files (eval and pipeline additionally print their final report to
stdout). Exit codes: 0 ok, 1 usage error, 2 I/O error, 3 validation error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

from . import __version__
from .anchors import iter_pyramid
from .config import RunConfig, load_config
from .crops import (CropWindow, centered_crop, crop_with_labels, extract,
                    grid_tiles, hflip, rescale)
from .errors import ParseError, TsdkitError
from .evaluation import (GroundTruthRecord, evaluate_images, format_number,
                         format_report, group_by_image, read_labels,
                         read_predictions, write_class_metrics_csv,
                         write_labels, write_predictions)
from .geometry import BBox, Detection, quad_to_bbox
from .merging import TileDetections, merge_tiles
from .pipeline import run_pool, run_synthetic_pipeline, scene_spec_for
from .ppm import read_ppm, write_ppm
from .synth import WEATHERS, blob_detect, generate_scene

DETECTIONS_HEADER = ("filename", "tile_x0", "tile_y0",
                     "xmin", "ymin", "xmax", "ymax", "class", "score")
TILES_HEADER = ("filename", "source", "x0", "y0", "w", "h")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w_raw, h_raw = text.lower().split("x")
        w, h = int(w_raw), int(h_raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {text!r}")
    if w <= 0 or h <= 0:
        raise argparse.ArgumentTypeError(f"size must be positive, got {text!r}")
    return w, h


def _parse_classes(text: str) -> tuple[int, ...]:
    out: set[int] = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                out.update(range(int(lo), int(hi) + 1))
            elif part:
                out.add(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad class list {text!r}")
    if not out:
        raise argparse.ArgumentTypeError("class list is empty")
    return tuple(sorted(out))


def _progress(stage: str):
    def emit(msg: str):
        print(f"progress: {stage} {msg}", file=sys.stderr)
    return emit


def _load_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    print(f"config: {cfg.describe()}", file=sys.stderr)
    return cfg


def _add_common(p: argparse.ArgumentParser, jobs: bool = True):
    p.add_argument("--config", help="key=value config file")
    if jobs:
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="max per-image worker processes")


# --- synth ---------------------------------------------------------------

def _synth_one(task):
    cfg, spec, path, name = task
    img, records = generate_scene(spec, cfg.palette(), name)
    write_ppm(path, img)
    return records


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for i in range(args.images):
        name = f"img_{i:05d}.ppm"
        spec = scene_spec_for(cfg, args.seed, i, args.weather, args.signs,
                              args.classes, args.clutter)
        tasks.append((cfg, spec, str(out / name), name))
    all_records = run_pool(_synth_one, tasks, args.jobs, _progress("synth"))
    write_labels(out / "labels.csv", [r for recs in all_records for r in recs])
    return 0


# --- tiles ---------------------------------------------------------------

def _tiles_one(task):
    cfg, img_path, name, out_dir, labels = task
    img = read_ppm(img_path)
    h, w = img.shape[:2]
    windows = grid_tiles(w, h, cfg.tile_size, cfg.tile_overlap, source=name)
    manifest_rows = []
    label_records = []
    stem = Path(name).stem
    for win in windows:
        tile_name = f"{stem}__x{win.x0}_y{win.y0}.ppm"
        write_ppm(Path(out_dir) / tile_name, extract(img, win))
        manifest_rows.append((tile_name, name, win.x0, win.y0, win.w, win.h))
        if labels is not None:
            for quad, class_id in crop_with_labels(
                    img, labels, win, cfg.crop_keep_fraction).labels:
                label_records.append(GroundTruthRecord(tile_name, quad, class_id))
    return manifest_rows, label_records


def cmd_tiles(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    images = sorted(Path(args.images).glob("*.ppm"))
    labels_by_image = None
    if args.labels:
        labels_by_image = {
            name: [(r.quad, r.class_id) for r in recs]
            for name, recs in group_by_image(read_labels(args.labels)).items()}
    tasks = []
    for img_path in images:
        name = img_path.name
        labels = labels_by_image.get(name, []) if labels_by_image is not None else None
        tasks.append((cfg, str(img_path), name, str(out), labels))
    results = run_pool(_tiles_one, tasks, args.jobs, _progress("tiles"))
    with open(out / "tiles.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TILES_HEADER)
        for manifest_rows, _ in results:
            writer.writerows(manifest_rows)
    if labels_by_image is not None:
        write_labels(out / "labels.csv",
                     [rec for _, recs in results for rec in recs])
    return 0


# --- crop ----------------------------------------------------------------

def _crop_one(task):
    cfg, img_path, name, out_dir, labels, flip, scale = task
    img = read_ppm(img_path)
    h, w = img.shape[:2]
    stem = Path(name).stem
    label_records = []
    for k, (quad, class_id) in enumerate(labels):
        window = centered_crop(quad_to_bbox(quad), w, h,
                               cfg.crop_half_extent, source=name)
        crop = crop_with_labels(img, labels, window, cfg.crop_keep_fraction)
        if flip:
            crop = hflip(crop)
        if scale is not None:
            crop = rescale(crop, scale)
        crop_name = f"{stem}__crop{k:04d}.ppm"
        write_ppm(Path(out_dir) / crop_name, crop.image)
        for lq, lc in crop.labels:
            label_records.append(GroundTruthRecord(crop_name, lq, lc))
    return label_records


def cmd_crop(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grouped = group_by_image(read_labels(args.labels))
    tasks = []
    for name in sorted(grouped):
        img_path = Path(args.images) / name
        labels = [(r.quad, r.class_id) for r in grouped[name]]
        tasks.append((cfg, str(img_path), name, str(out), labels,
                      args.hflip, args.scale))
    results = run_pool(_crop_one, tasks, args.jobs, _progress("crop"))
    write_labels(out / "labels.csv", [rec for recs in results for rec in recs])
    return 0


# --- anchors -------------------------------------------------------------

def cmd_anchors(args) -> int:
    cfg = _load_config(args)
    w, h = args.input
    acfg = cfg.anchor_config()
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["level", "row", "col", "ratio", "scale",
                         "xmin", "ymin", "xmax", "ymax"])
        for lvl, row, col, ratio, scale, box in iter_pyramid(acfg, w, h):
            writer.writerow([lvl.name, row, col,
                             format_number(ratio), format_number(scale),
                             *[format_number(v) for v in box.as_tuple()]])
    return 0


# --- detect --------------------------------------------------------------

def _detect_one(task):
    cfg, tile_path, source, x0, y0 = task
    img = read_ppm(tile_path)
    dets = blob_detect(img, cfg.palette(), **cfg.detector_kwargs())
    return [(source, x0, y0, d) for d in dets]


def _read_manifest(path) -> list[tuple[str, str, int, int]]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(v.strip().lower() for v in header) != TILES_HEADER:
            raise ParseError(f"line 1: bad tiles manifest header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TILES_HEADER):
                raise ParseError(f"line {line_no}: expected {len(TILES_HEADER)} fields")
            try:
                rows.append((row[0], row[1], int(row[2]), int(row[3])))
            except ValueError as exc:
                raise ParseError(f"line {line_no}: bad tile origin in {row!r}") from exc
    return rows


def cmd_detect(args) -> int:
    cfg = _load_config(args)
    tiles_dir = Path(args.tiles)
    manifest_path = tiles_dir / "tiles.csv"
    if manifest_path.exists():
        manifest = _read_manifest(manifest_path)
    else:
        manifest = [(p.name, p.name, 0, 0) for p in sorted(tiles_dir.glob("*.ppm"))]
    tasks = [(cfg, str(tiles_dir / fname), source, x0, y0)
             for fname, source, x0, y0 in manifest]
    results = run_pool(_detect_one, tasks, args.jobs, _progress("detect"))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DETECTIONS_HEADER)
        for rows in results:
            for source, x0, y0, d in rows:
                writer.writerow([source, x0, y0,
                                 *[format_number(v) for v in d.bbox.as_tuple()],
                                 d.class_id, format_number(d.score)])
    return 0


# --- merge ---------------------------------------------------------------

def _read_detections(path):
    """-> {source: {(x0, y0): [Detection, ...]}}, insertion-ordered."""
    grouped: dict[str, dict[tuple[int, int], list[Detection]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(v.strip().lower() for v in header) != DETECTIONS_HEADER:
            raise ParseError(f"line 1: bad detections header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(DETECTIONS_HEADER):
                raise ParseError(f"line {line_no}: expected {len(DETECTIONS_HEADER)} fields")
            try:
                x0, y0 = int(row[1]), int(row[2])
                box = BBox(*[float(v) for v in row[3:7]])
                class_id = int(row[7])
                score = float(row[8])
                det = Detection(box, class_id, score)
            except (ValueError, TsdkitError) as exc:
                raise ParseError(f"line {line_no}: {exc}") from exc
            grouped.setdefault(row[0], {}).setdefault((x0, y0), []).append(det)
    return grouped


def cmd_merge(args) -> int:
    cfg = _load_config(args)
    iou_thresh = cfg.nms_iou if args.iou is None else args.iou
    grouped = _read_detections(args.detections)
    out_rows = []
    for source in sorted(grouped):
        tiles = []
        for (x0, y0), dets in grouped[source].items():
            # Size the window to its content; merging only uses the origin.
            w = max(cfg.tile_size, max(int(d.bbox.xmax) + 1 for d in dets))
            h = max(cfg.tile_size, max(int(d.bbox.ymax) + 1 for d in dets))
            tiles.append(TileDetections(CropWindow(x0, y0, w, h, source), tuple(dets)))
        for det in merge_tiles(tiles, iou_thresh):
            out_rows.append((source, det))
    write_predictions(args.out, out_rows)
    return 0


# --- eval ----------------------------------------------------------------

def cmd_eval(args) -> int:
    cfg = _load_config(args)
    gate = cfg.iou_gate if args.gate is None else args.gate
    gts = group_by_image(read_labels(args.gt))
    preds = group_by_image(read_predictions(args.pred))
    overall, _ = evaluate_images(preds, gts, gate)
    print(format_report(overall))
    if args.out:
        write_class_metrics_csv(args.out, overall)
    return 0


# --- pipeline ------------------------------------------------------------

def cmd_pipeline(args) -> int:
    cfg = _load_config(args)
    start = time.perf_counter()
    result = run_synthetic_pipeline(
        cfg, seed=args.seed, n_images=args.images, weather=args.weather,
        n_signs=args.signs, classes=args.classes, clutter=args.clutter,
        jobs=args.jobs, progress=_progress("pipeline"))
    elapsed = time.perf_counter() - start
    print(format_report(result.report))
    print(f"progress: pipeline done in {elapsed:.2f}s", file=sys.stderr)
    if args.out:
        write_class_metrics_csv(args.out, result.report)
    return 0


# --- wiring --------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="tsdkit", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate seeded synthetic scenes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--images", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--signs", type=int, default=3)
    p.add_argument("--weather", choices=WEATHERS, default="clear")
    p.add_argument("--classes", type=_parse_classes, default=None,
                   help="class pool, e.g. 1-17,20")
    p.add_argument("--clutter", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tiles", help="cut images into an overlapping tile grid")
    p.add_argument("--images", required=True, help="directory of PPM images")
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default=None, help="label CSV to rewrite per tile")
    _add_common(p)
    p.set_defaults(func=cmd_tiles)

    p = sub.add_parser("crop", help="target-centered training crops")
    p.add_argument("--images", required=True, help="directory of PPM images")
    p.add_argument("--labels", required=True, help="ground-truth label CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--hflip", action="store_true", help="mirror every crop")
    p.add_argument("--scale", type=float, default=None, help="rescale factor")
    _add_common(p)
    p.set_defaults(func=cmd_crop)

    p = sub.add_parser("anchors", help="dump the anchor pyramid as CSV")
    p.add_argument("--input", type=_parse_size, required=True, metavar="WxH")
    p.add_argument("--out", default="anchors.csv")
    _add_common(p, jobs=False)
    p.set_defaults(func=cmd_anchors)

    p = sub.add_parser("detect", help="run the blob detector over tiles")
    p.add_argument("--tiles", required=True, help="tile directory (tiles.csv aware)")
    p.add_argument("--out", default="detections.csv")
    _add_common(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("merge", help="merge per-tile detections into predictions")
    p.add_argument("--detections", required=True)
    p.add_argument("--out", default="predictions.csv")
    p.add_argument("--iou", type=float, default=None, help="NMS IoU threshold")
    _add_common(p, jobs=False)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--gate", type=float, default=None, help="IoU match gate")
    p.add_argument("--out", default=None, help="per-class metrics CSV")
    _add_common(p, jobs=False)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="synth -> tiles -> detect -> merge -> eval")
    p.add_argument("--images", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--signs", type=int, default=3)
    p.add_argument("--weather", choices=WEATHERS, default="clear")
    p.add_argument("--classes", type=_parse_classes, default=None)
    p.add_argument("--clutter", type=int, default=None)
    p.add_argument("--out", default=None, help="per-class metrics CSV")
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    except TsdkitError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return 3


def entry():
    raise SystemExit(main())

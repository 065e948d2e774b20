"""In-memory composition of the synthetic evaluation pipeline.

One image's journey: generate scene -> grid tiles -> blob detection per
tile -> merge across tiles -> match against the exact labels -> score.
Per-image work is independent, so it can fan out over a process pool; the
result is identical for any worker count.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import RunConfig
from .crops import extract, grid_tiles
from .evaluation import (GroundTruthRecord, MetricsReport, aggregate,
                         match_image, score)
from .geometry import Detection
from .merging import TileDetections, merge_tiles
from .synth import SceneSpec, blob_detect, generate_scene


@dataclass(frozen=True)
class ImageResult:
    filename: str
    detections: tuple[Detection, ...]
    gts: tuple[GroundTruthRecord, ...]
    report: MetricsReport


@dataclass(frozen=True)
class PipelineResult:
    report: MetricsReport
    images: tuple[ImageResult, ...]


def detect_image(img: np.ndarray, cfg: RunConfig, source: str = "") -> list[Detection]:
    """Tile an image, run the blob detector per tile and merge the results."""
    h, w = img.shape[:2]
    windows = grid_tiles(w, h, cfg.tile_size, cfg.tile_overlap, source)
    palette = cfg.palette()
    kwargs = cfg.detector_kwargs()
    tiles = [TileDetections(win, tuple(blob_detect(extract(img, win), palette, **kwargs)))
             for win in windows]
    return merge_tiles(tiles, cfg.nms_iou)


def _run_one(task: tuple) -> ImageResult:
    cfg, spec, filename = task
    img, gts = generate_scene(spec, cfg.palette(), filename)
    preds = detect_image(img, cfg, filename)
    report = score(match_image(preds, gts, cfg.iou_gate), preds, gts)
    return ImageResult(filename, tuple(preds), tuple(gts), report)


def scene_spec_for(cfg: RunConfig, seed: int, index: int, weather: str,
                   n_signs: int, classes: Sequence[int] | None,
                   clutter: int | None) -> SceneSpec:
    """The per-image SceneSpec used by the pipeline; image i gets seed+i."""
    return SceneSpec(
        seed=seed + index,
        img_w=cfg.image_width, img_h=cfg.image_height,
        n_signs=n_signs,
        sign_size_range=(cfg.sign_min_size, cfg.sign_max_size),
        weather=weather,
        clutter=cfg.clutter_count if clutter is None else clutter,
        classes=tuple(classes) if classes else tuple(range(1, 21)),
        snow_fraction=cfg.snow_fraction,
        color_jitter=cfg.sign_color_jitter)


def run_synthetic_pipeline(cfg: RunConfig, *, seed: int, n_images: int,
                           weather: str = "clear", n_signs: int = 3,
                           classes: Sequence[int] | None = None,
                           clutter: int | None = None, jobs: int = 1,
                           progress: Callable[[str], None] | None = None,
                           ) -> PipelineResult:
    """Generate, detect and score n_images seeded scenes; micro-aggregate."""
    tasks = []
    for i in range(n_images):
        filename = f"img_{i:05d}.ppm"
        spec = scene_spec_for(cfg, seed, i, weather, n_signs, classes, clutter)
        tasks.append((cfg, spec, filename))

    results = run_pool(_run_one, tasks, jobs, progress)
    report = aggregate([r.report for r in results])
    return PipelineResult(report, tuple(results))


def run_pool(fn: Callable, tasks: Sequence, jobs: int,
             progress: Callable[[str], None] | None = None) -> list:
    """Map fn over tasks with at most `jobs` processes, order preserved."""
    jobs = max(1, int(jobs))
    if jobs == 1 or len(tasks) <= 1:
        out = []
        for i, task in enumerate(tasks):
            out.append(fn(task))
            if progress:
                progress(f"{i + 1}/{len(tasks)}")
        return out
    with multiprocessing.Pool(min(jobs, len(tasks))) as pool:
        out = []
        for i, value in enumerate(pool.imap(fn, tasks)):
            out.append(value)
            if progress:
                progress(f"{i + 1}/{len(tasks)}")
        return out

"""Merging per-tile detections into image-level predictions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .crops import CropWindow
from .errors import InvalidInput
from .geometry import Detection, iou, translate


@dataclass(frozen=True)
class TileDetections:
    """Detections in one tile, in tile-local coordinates."""

    window: CropWindow
    detections: tuple[Detection, ...]

    def __post_init__(self):
        for det in self.detections:
            b = det.bbox
            if b.xmin < 0 or b.ymin < 0 or b.xmax > self.window.w or b.ymax > self.window.h:
                raise InvalidInput(
                    f"detection {b.as_tuple()} outside tile {self.window.w}x{self.window.h}")


def to_global(tile: TileDetections) -> list[Detection]:
    """Translate tile-local detections by the tile origin."""
    return [Detection(translate(d.bbox, tile.window.x0, tile.window.y0),
                      d.class_id, d.score)
            for d in tile.detections]


def nms(detections: Sequence[Detection], iou_thresh: float = 0.5) -> list[Detection]:
    """Class-aware greedy hard NMS.

    Scans by descending score (ties: lower class id, then input order) and
    keeps a detection iff its IoU with every already-kept detection of the
    same class is <= iou_thresh. The result is a subset of the input, in
    descending score order; boxes and scores are never altered.
    """
    if not 0.0 <= iou_thresh <= 1.0:
        raise InvalidInput(f"iou_thresh {iou_thresh} outside [0, 1]")
    order = sorted(range(len(detections)),
                   key=lambda i: (-detections[i].score, detections[i].class_id, i))
    kept: list[Detection] = []
    for i in order:
        d = detections[i]
        if all(iou(d.bbox, k.bbox) <= iou_thresh
               for k in kept if k.class_id == d.class_id):
            kept.append(d)
    return kept


def merge_tiles(tiles: Sequence[TileDetections], iou_thresh: float = 0.5) -> list[Detection]:
    """Lift all tiles to global coordinates and apply NMS across them.

    Equals nms(concat(map(to_global, tiles))). All tiles must come from the
    same source image.
    """
    sources = {t.window.source for t in tiles}
    if len(sources) > 1:
        raise InvalidInput(f"tiles from multiple sources: {sorted(sources)}")
    merged: list[Detection] = []
    for t in tiles:
        merged.extend(to_global(t))
    return nms(merged, iou_thresh)

"""Crop and tile extraction with label rewriting.

Training-time ops: target-centered crops, horizontal flip, nearest-neighbor
rescale. Inference-time ops: overlapping grid tiles and seeded random tiles.
Labels travel as (Quad, class_id) pairs; local label coordinates are always
relative to the window origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ImageTooSmall, InvalidConfig, InvalidInput
from .geometry import BBox, Quad, bbox_to_quad, clip, quad_to_bbox, translate, translate_quad

Label = tuple[Quad, int]


@dataclass(frozen=True)
class CropWindow:
    """An axis-aligned window into a source image, integer origin and size."""

    x0: int
    y0: int
    w: int = 400
    h: int = 400
    source: str = ""

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise InvalidConfig(f"window size {self.w}x{self.h} must be positive")


@dataclass(frozen=True)
class LabeledCrop:
    """Window, its pixels and the labels rewritten to window coordinates."""

    window: CropWindow
    image: np.ndarray
    labels: tuple[Label, ...]


def centered_crop(gt_hull: BBox, img_w: int, img_h: int,
                  half_extent: int = 200, source: str = "") -> CropWindow:
    """Window of size (2 * half_extent)^2 centered on a gt hull.

    The window is shifted, never shrunk, to stay inside the image; raises
    ImageTooSmall when the image cannot hold it at all.
    """
    if half_extent <= 0:
        raise InvalidConfig(f"half_extent {half_extent} must be > 0")
    side = 2 * half_extent
    if img_w < side or img_h < side:
        raise ImageTooSmall(f"image {img_w}x{img_h} smaller than window {side}x{side}")
    if not (0 <= gt_hull.xmin and gt_hull.xmax <= img_w
            and 0 <= gt_hull.ymin and gt_hull.ymax <= img_h):
        raise InvalidInput(f"gt hull {gt_hull.as_tuple()} outside image {img_w}x{img_h}")
    cx, cy = gt_hull.center
    x0 = int(math.floor(cx + 0.5)) - half_extent
    y0 = int(math.floor(cy + 0.5)) - half_extent
    x0 = min(max(x0, 0), img_w - side)
    y0 = min(max(y0, 0), img_h - side)
    return CropWindow(x0, y0, side, side, source)


def to_local(labels: Sequence[Label], window: CropWindow,
             keep_fraction: float = 0.5) -> tuple[Label, ...]:
    """Rewrite labels into window coordinates, dropping mostly-outside ones.

    A label is kept iff its hull overlaps the window by at least
    keep_fraction of the hull area. Fully-inside quads keep their shape;
    partially-inside ones are replaced by their clipped hull rectangle.
    """
    if not 0.0 <= keep_fraction <= 1.0:
        raise InvalidConfig(f"keep_fraction {keep_fraction} outside [0, 1]")
    out: list[Label] = []
    for quad, class_id in labels:
        hull = quad_to_bbox(quad)
        local_hull = translate(hull, -window.x0, -window.y0)
        inter = clip(local_hull, window.w, window.h)
        if inter is None:
            continue
        if inter.area < keep_fraction * hull.area:
            continue
        inside = (local_hull.xmin >= 0 and local_hull.ymin >= 0
                  and local_hull.xmax <= window.w and local_hull.ymax <= window.h)
        if inside:
            out.append((translate_quad(quad, -window.x0, -window.y0), class_id))
        else:
            out.append((bbox_to_quad(inter), class_id))
    return tuple(out)


def extract(img: np.ndarray, window: CropWindow) -> np.ndarray:
    """Copy a window's pixels out of an (h, w, 3) image."""
    h, w = img.shape[:2]
    if (window.x0 < 0 or window.y0 < 0
            or window.x0 + window.w > w or window.y0 + window.h > h):
        raise InvalidInput(f"window {window} outside image {w}x{h}")
    return np.ascontiguousarray(
        img[window.y0:window.y0 + window.h, window.x0:window.x0 + window.w])


def crop_with_labels(img: np.ndarray, labels: Sequence[Label],
                     window: CropWindow, keep_fraction: float = 0.5) -> LabeledCrop:
    """Extract a window and rewrite the given global labels into it."""
    return LabeledCrop(window, extract(img, window),
                       to_local(labels, window, keep_fraction))


def hflip(crop: LabeledCrop) -> LabeledCrop:
    """Mirror a crop horizontally: columns reversed, x mapped to w - x.

    Class ids are unchanged; applying hflip twice returns the original.
    """
    w = crop.window.w
    flipped = np.ascontiguousarray(crop.image[:, ::-1])
    labels = tuple(
        (Quad(*((w - x, y) for x, y in quad.corners())), class_id)
        for quad, class_id in crop.labels)
    return LabeledCrop(crop.window, flipped, labels)


def rescale(crop: LabeledCrop, factor: float) -> LabeledCrop:
    """Nearest-neighbor resample by a factor; label coordinates scale exactly.

    factor 1.0 is the identity. The window keeps its origin but takes the
    new size, so rescaled crops no longer map back to source coordinates.
    """
    if not (isinstance(factor, (int, float)) and math.isfinite(factor) and factor > 0):
        raise InvalidConfig(f"scale factor {factor!r} must be a positive finite number")
    new_w = max(1, int(round(crop.window.w * factor)))
    new_h = max(1, int(round(crop.window.h * factor)))
    cols = np.minimum((np.arange(new_w) / factor).astype(np.int64), crop.window.w - 1)
    rows = np.minimum((np.arange(new_h) / factor).astype(np.int64), crop.window.h - 1)
    image = np.ascontiguousarray(crop.image[rows][:, cols])
    labels = tuple(
        (Quad(*((x * factor, y * factor) for x, y in quad.corners())), class_id)
        for quad, class_id in crop.labels)
    return LabeledCrop(replace(crop.window, w=new_w, h=new_h), image, labels)


def grid_tiles(img_w: int, img_h: int, tile: int = 400, overlap: int = 100,
               source: str = "") -> list[CropWindow]:
    """Overlapping tile grid covering the whole image.

    Origins advance by stride = tile - overlap; a final origin clamped to
    dim - tile is appended per axis when the regular grid stops short, so
    the union of tiles is exactly the image. Row-major (y outer) order.
    """
    if not (tile > 0 and 0 <= overlap < tile):
        raise InvalidConfig(f"need tile > overlap >= 0, got tile={tile} overlap={overlap}")
    if img_w < tile or img_h < tile:
        raise ImageTooSmall(f"image {img_w}x{img_h} smaller than tile {tile}")
    stride = tile - overlap

    def axis_origins(dim: int) -> list[int]:
        last = dim - tile
        origins = list(range(0, last + 1, stride))
        if origins[-1] != last:
            origins.append(last)
        return origins

    xs = axis_origins(img_w)
    ys = axis_origins(img_h)
    return [CropWindow(x, y, tile, tile, source) for y in ys for x in xs]


def random_tiles(img_w: int, img_h: int, n: int, seed: int,
                 tile: int = 400, source: str = "") -> list[CropWindow]:
    """n seeded uniform tile placements; same seed, same windows."""
    if n <= 0:
        raise InvalidInput(f"n {n} must be > 0")
    if tile <= 0:
        raise InvalidConfig(f"tile {tile} must be > 0")
    if img_w < tile or img_h < tile:
        raise ImageTooSmall(f"image {img_w}x{img_h} smaller than tile {tile}")
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, img_w - tile + 1, size=n)
    ys = rng.integers(0, img_h - tile + 1, size=n)
    return [CropWindow(int(x), int(y), tile, tile, source) for x, y in zip(xs, ys)]

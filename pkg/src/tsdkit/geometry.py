"""Axis-aligned box and quadrilateral geometry.

Coordinates are continuous pixel values. Box area is
(xmax - xmin) * (ymax - ymin); no +1 pixel convention is used anywhere
in this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometry, InvalidInput

Point = tuple[float, float]


@dataclass(frozen=True)
class Quad:
    """Four corners of a labeled region, in any order."""

    p1: Point
    p2: Point
    p3: Point
    p4: Point

    @classmethod
    def from_flat(cls, x1: float, y1: float, x2: float, y2: float,
                  x3: float, y3: float, x4: float, y4: float) -> "Quad":
        return cls((x1, y1), (x2, y2), (x3, y3), (x4, y4))

    def corners(self) -> tuple[Point, Point, Point, Point]:
        return (self.p1, self.p2, self.p3, self.p4)

    def flat(self) -> tuple[float, ...]:
        """Corner coordinates as (x1, y1, ..., x4, y4)."""
        return tuple(v for p in self.corners() for v in p)


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box; construction rejects empty or non-finite extents."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.ymin, self.xmax, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise DegenerateGeometry(f"non-finite box coordinates {vals}")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise DegenerateGeometry(f"box has no positive extent {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> Point:
        return ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.xmin, self.ymin, self.xmax, self.ymax)


@dataclass(frozen=True)
class Detection:
    """One detector output: box, class id in [0, 20], confidence in [0, 1]."""

    bbox: BBox
    class_id: int
    score: float

    def __post_init__(self):
        if not 0 <= self.class_id <= 20:
            raise InvalidInput(f"class_id {self.class_id} outside [0, 20]")
        if not 0.0 <= self.score <= 1.0:
            raise InvalidInput(f"score {self.score} outside [0, 1]")


def quad_to_bbox(q: Quad) -> BBox:
    """Axis-aligned hull of a quad; invariant under corner reordering.

    Raises DegenerateGeometry when the hull has zero width or height or any
    coordinate is non-finite.
    """
    xs = [p[0] for p in q.corners()]
    ys = [p[1] for p in q.corners()]
    return BBox(min(xs), min(ys), max(xs), max(ys))


def bbox_to_quad(b: BBox) -> Quad:
    """Box corners as a quad in (UL, UR, BL, BR) order."""
    return Quad((b.xmin, b.ymin), (b.xmax, b.ymin),
                (b.xmin, b.ymax), (b.xmax, b.ymax))


def translate(b: BBox, dx: float, dy: float) -> BBox:
    """Shift a box by (dx, dy)."""
    return BBox(b.xmin + dx, b.ymin + dy, b.xmax + dx, b.ymax + dy)


def translate_quad(q: Quad, dx: float, dy: float) -> Quad:
    """Shift every corner of a quad by (dx, dy)."""
    return Quad(*((x + dx, y + dy) for x, y in q.corners()))


def clip(b: BBox, width: float, height: float) -> BBox | None:
    """Intersection of a box with [0, width] x [0, height].

    Returns None when the intersection is empty; emptiness is a value here,
    not an error.
    """
    if width <= 0 or height <= 0:
        raise InvalidInput(f"clip region {width}x{height} is empty")
    xmin = max(b.xmin, 0.0)
    ymin = max(b.ymin, 0.0)
    xmax = min(b.xmax, float(width))
    ymax = min(b.ymax, float(height))
    if xmin >= xmax or ymin >= ymax:
        return None
    return BBox(xmin, ymin, xmax, ymax)


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes (0.0 when disjoint or merely touching)."""
    iw = min(a.xmax, b.xmax) - max(a.xmin, b.xmin)
    ih = min(a.ymax, b.ymax) - max(a.ymin, b.ymin)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    return iw * ih


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union in [0, 1].

    Symmetric; 1.0 iff the boxes are identical; 0.0 for disjoint boxes.
    """
    inter = intersection_area(a, b)
    return inter / (a.area + b.area - inter)


def iou_matrix(a: Sequence[BBox], b: Sequence[BBox]) -> np.ndarray:
    """Pairwise IoU of two box sequences as a (len(a), len(b)) array."""
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    aa = np.array([x.as_tuple() for x in a], dtype=np.float64)
    bb = np.array([x.as_tuple() for x in b], dtype=np.float64)
    iw = np.minimum(aa[:, None, 2], bb[None, :, 2]) - np.maximum(aa[:, None, 0], bb[None, :, 0])
    ih = np.minimum(aa[:, None, 3], bb[None, :, 3]) - np.maximum(aa[:, None, 1], bb[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    area_a = (aa[:, 2] - aa[:, 0]) * (aa[:, 3] - aa[:, 1])
    area_b = (bb[:, 2] - bb[:, 0]) * (bb[:, 3] - bb[:, 1])
    return inter / (area_a[:, None] + area_b[None, :] - inter)

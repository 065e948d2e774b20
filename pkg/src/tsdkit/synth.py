"""Seeded synthetic road scenes and a color-blob reference detector.

A scene is a flat two-band background (sky over ground) with flat-colored
sign shapes and clutter distractors drawn on top. Every class in 1..20 has
its own (color, shape) pair; classes 18 and 19 are rendered in nearly
identical reds on purpose, so color-based classification confuses them.
Weather: `clear` leaves the render alone, `dark` multiplies all channels by
0.3, `snow` overwrites a seeded fraction of pixels with white.

The reference detector segments pixels far from both background colors,
labels 4-connected components, classifies each by the palette color nearest
its mean, and scores it by the fraction of its pixels within a color
tolerance of that palette entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from .errors import InvalidConfig, PlacementFailure
from .geometry import BBox, Detection, Quad
from .evaluation import GroundTruthRecord

# Sign palette. All pairs are >= 40 apart in RGB distance except 18/19,
# which sit 6 apart so that per-sign jitter can flip only that pair. Every
# color keeps >= 80 distance from the sky, the ground and pure white.
SIGN_COLORS: dict[int, tuple[int, int, int]] = {
    1: (250, 30, 90),
    2: (30, 170, 30),
    3: (20, 40, 210),
    4: (210, 210, 30),
    5: (160, 30, 200),
    6: (30, 190, 190),
    7: (240, 130, 20),
    8: (150, 60, 0),
    9: (250, 60, 130),
    10: (90, 220, 60),
    11: (20, 145, 95),
    12: (230, 30, 230),
    13: (20, 20, 120),
    14: (190, 140, 200),
    15: (120, 0, 60),
    16: (0, 70, 135),
    17: (250, 170, 120),
    18: (200, 40, 40),
    19: (206, 40, 40),
    20: (150, 150, 130),
}

SKY_COLOR: tuple[int, int, int] = (70, 110, 160)
GROUND_COLOR: tuple[int, int, int] = (95, 85, 75)
CLUTTER_COLORS: tuple[tuple[int, int, int], ...] = (
    (230, 230, 230), (0, 0, 0), (255, 220, 0), (80, 0, 160))

_SHAPE_CYCLE = ("circle", "square", "diamond", "triangle", "ring")
SIGN_SHAPES: dict[int, str] = {c: _SHAPE_CYCLE[(c - 1) % len(_SHAPE_CYCLE)]
                               for c in SIGN_COLORS}

HORIZON_FRACTION = 0.45
EDGE_MARGIN = 4          # min pixels between any object and the image border
MIN_SEPARATION = 8       # min pixels between any two drawn objects

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int8)


@dataclass(frozen=True)
class Palette:
    """Colors the generator draws with and the detector matches against."""

    sign_colors: Mapping[int, tuple[int, int, int]]
    sky: tuple[int, int, int] = SKY_COLOR
    ground: tuple[int, int, int] = GROUND_COLOR


DEFAULT_PALETTE = Palette(SIGN_COLORS)

WEATHERS = ("clear", "dark", "snow")


@dataclass(frozen=True)
class SceneSpec:
    """Deterministic scene description; same spec, same pixels and labels."""

    seed: int
    img_w: int = 3200
    img_h: int = 1800
    n_signs: int = 3
    sign_size_range: tuple[int, int] = (30, 80)
    weather: str = "clear"
    clutter: int = 6
    classes: tuple[int, ...] = tuple(range(1, 21))
    snow_fraction: float = 0.02
    color_jitter: int = 6

    def __post_init__(self):
        if self.img_w <= 0 or self.img_h <= 0:
            raise InvalidConfig(f"image size {self.img_w}x{self.img_h} must be positive")
        if self.n_signs < 0 or self.clutter < 0:
            raise InvalidConfig("n_signs and clutter must be >= 0")
        lo, hi = self.sign_size_range
        if not 0 < lo <= hi:
            raise InvalidConfig(f"bad sign_size_range {self.sign_size_range}")
        if self.weather not in WEATHERS:
            raise InvalidConfig(f"weather {self.weather!r} not in {WEATHERS}")
        if not self.classes or any(c not in SIGN_COLORS for c in self.classes):
            raise InvalidConfig(f"classes must be a non-empty subset of 1..20, got {self.classes}")
        if not 0.0 <= self.snow_fraction <= 1.0:
            raise InvalidConfig(f"snow_fraction {self.snow_fraction} outside [0, 1]")
        if self.color_jitter < 0:
            raise InvalidConfig(f"color_jitter {self.color_jitter} must be >= 0")


def _shape_mask(size: int, kind: str) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    c = (size - 1) / 2.0
    if kind == "square":
        return np.ones((size, size), dtype=bool)
    if kind == "circle":
        return (xx - c) ** 2 + (yy - c) ** 2 <= (size / 2.0) ** 2
    if kind == "diamond":
        return np.abs(xx - c) + np.abs(yy - c) <= c + 0.5
    if kind == "triangle":
        return np.abs(xx - c) <= (yy + 1.0) / 2.0
    if kind == "ring":
        r2 = (xx - c) ** 2 + (yy - c) ** 2
        outer = (size / 2.0) ** 2
        inner = max(size / 2.0 - max(3.0, size / 6.0), 1.0) ** 2
        return (r2 <= outer) & (r2 >= inner)
    raise InvalidConfig(f"unknown shape {kind!r}")


def _mask_bounds(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return int(rows[0]), int(rows[-1]) + 1, int(cols[0]), int(cols[-1]) + 1


def _place(rng: np.random.Generator, occupied: list[tuple[int, int, int, int]],
           w: int, h: int, obj_w: int, obj_h: int, what: str) -> tuple[int, int]:
    # Rejection-sample an origin keeping MIN_SEPARATION from everything
    # already placed and EDGE_MARGIN from the borders.
    lo_x, hi_x = EDGE_MARGIN, w - obj_w - EDGE_MARGIN
    lo_y, hi_y = EDGE_MARGIN, h - obj_h - EDGE_MARGIN
    if hi_x < lo_x or hi_y < lo_y:
        raise PlacementFailure(f"{what} of size {obj_w}x{obj_h} cannot fit in {w}x{h}")
    for _ in range(200):
        x = int(rng.integers(lo_x, hi_x + 1))
        y = int(rng.integers(lo_y, hi_y + 1))
        ok = all(x - MIN_SEPARATION >= ox + ow or ox - MIN_SEPARATION >= x + obj_w
                 or y - MIN_SEPARATION >= oy + oh or oy - MIN_SEPARATION >= y + obj_h
                 for ox, oy, ow, oh in occupied)
        if ok:
            occupied.append((x, y, obj_w, obj_h))
            return x, y
    raise PlacementFailure(f"no room for {what} after 200 attempts")


def generate_scene(spec: SceneSpec, palette: Palette = DEFAULT_PALETTE,
                   filename: str | None = None,
                   ) -> tuple[np.ndarray, list[GroundTruthRecord]]:
    """Render a scene and return (image, exact ground-truth records).

    Labels are the tight pixel bounds of each rendered sign (weather is
    applied afterwards and never moves a label). Sign and clutter hulls are
    pairwise disjoint by construction.
    """
    if filename is None:
        filename = f"scene_{spec.seed:08d}.ppm"
    rng = np.random.default_rng(spec.seed)
    w, h = spec.img_w, spec.img_h
    img = np.empty((h, w, 3), dtype=np.uint8)
    horizon = int(h * HORIZON_FRACTION)
    img[:horizon] = palette.sky
    img[horizon:] = palette.ground

    occupied: list[tuple[int, int, int, int]] = []
    records: list[GroundTruthRecord] = []
    lo, hi = spec.sign_size_range
    jitter = spec.color_jitter
    for _ in range(spec.n_signs):
        class_id = int(spec.classes[rng.integers(0, len(spec.classes))])
        size = int(rng.integers(lo, hi + 1))
        x, y = _place(rng, occupied, w, h, size, size, f"sign class {class_id}")
        offset = rng.integers(-jitter, jitter + 1, size=3) if jitter else np.zeros(3, int)
        color = np.clip(np.array(palette.sign_colors[class_id], dtype=np.int64) + offset,
                        0, 255).astype(np.uint8)
        mask = _shape_mask(size, SIGN_SHAPES[class_id])
        img[y:y + size, x:x + size][mask] = color
        r0, r1, c0, c1 = _mask_bounds(mask)
        xmin, ymin = float(x + c0), float(y + r0)
        xmax, ymax = float(x + c1), float(y + r1)
        quad = Quad((xmin, ymin), (xmax, ymin), (xmin, ymax), (xmax, ymax))
        records.append(GroundTruthRecord(filename, quad, class_id))

    for _ in range(spec.clutter):
        cw = int(rng.integers(20, 121))
        ch = int(rng.integers(20, 121))
        color = CLUTTER_COLORS[int(rng.integers(0, len(CLUTTER_COLORS)))]
        try:
            x, y = _place(rng, occupied, w, h, cw, ch, "clutter")
        except PlacementFailure:
            continue  # clutter is best-effort; signs are not
        if rng.integers(0, 2):
            img[y:y + ch, x:x + cw] = color
        else:
            yy, xx = np.mgrid[0:ch, 0:cw].astype(np.float64)
            ell = (((xx - (cw - 1) / 2) / (cw / 2)) ** 2
                   + ((yy - (ch - 1) / 2) / (ch / 2)) ** 2) <= 1.0
            img[y:y + ch, x:x + cw][ell] = color

    if spec.weather == "dark":
        img = np.round(img.astype(np.float64) * 0.3).astype(np.uint8)
    elif spec.weather == "snow":
        flakes = rng.random((h, w)) < spec.snow_fraction
        img[flakes] = 255
    return img, records


def blob_detect(img: np.ndarray, palette: Palette = DEFAULT_PALETTE, *,
                bg_tol: float = 60.0, color_tol: float = 25.0,
                min_area: int = 48, score_floor: float = 0.2,
                drop_border: bool = True) -> list[Detection]:
    """Color-threshold + 4-connected-components reference detector.

    Foreground = pixels farther than bg_tol (RGB Euclidean) from both
    background colors. Components smaller than min_area are dropped, as are
    components whose bbox touches the image border when drop_border is set
    (a truncated object's box would be wrong anyway; on tiles, the overlap
    guarantees an untruncated duplicate elsewhere). Class is the palette
    color nearest the component mean (ties: lowest class id); score is the
    fraction of component pixels within color_tol of that color, and
    components scoring under score_floor are dropped.
    """
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidConfig(f"expected (h, w, 3) image, got {img.shape}")
    h, w = img.shape[:2]
    px = img.astype(np.int32)
    d_sky = ((px - np.array(palette.sky, dtype=np.int32)) ** 2).sum(axis=2)
    d_gnd = ((px - np.array(palette.ground, dtype=np.int32)) ** 2).sum(axis=2)
    fg = (d_sky > bg_tol * bg_tol) & (d_gnd > bg_tol * bg_tol)

    labeled, n = ndimage.label(fg, structure=_FOUR_CONNECTED)
    if n == 0:
        return []
    sizes = np.bincount(labeled.ravel())
    slices = ndimage.find_objects(labeled)
    class_ids = sorted(palette.sign_colors)
    colors = np.array([palette.sign_colors[c] for c in class_ids], dtype=np.int64)

    detections: list[Detection] = []
    # Snowy scenes produce thousands of speck components; visit only the
    # ones that can pass the area filter.
    for comp_id in np.flatnonzero(sizes >= min_area):
        if comp_id == 0:
            continue
        sl = slices[comp_id - 1]
        if sl is None:
            continue
        r0, r1 = sl[0].start, sl[0].stop
        c0, c1 = sl[1].start, sl[1].stop
        if drop_border and (r0 == 0 or c0 == 0 or r1 == h or c1 == w):
            continue
        mask = labeled[sl] == comp_id
        pix = px[sl][mask]
        mean = pix.mean(axis=0)
        nearest = int(((colors - mean) ** 2).sum(axis=1).argmin())
        class_id = class_ids[nearest]
        within = ((pix - colors[nearest]) ** 2).sum(axis=1) <= color_tol * color_tol
        comp_score = float(within.mean())
        if comp_score < score_floor:
            continue
        detections.append(Detection(BBox(float(c0), float(r0), float(c1), float(r1)),
                                    class_id, comp_score))
    return detections

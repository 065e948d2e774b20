"""Anchor pyramid generation over feature levels P3..P7.

Each pyramid level has a stride and a base size; every grid cell on a level
carries one anchor per (aspect ratio, scale) pair. Anchors are centered on
cell centers and are not clipped to the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import InvalidConfig
from .geometry import BBox

# Scales are absolute multipliers of the level base size, tuned for signs
# much smaller than the stock power-of-two octaves.
DEFAULT_RATIOS: tuple[float, ...] = (0.5, 1.0, 2.0)
DEFAULT_SCALES: tuple[float, ...] = (0.1, 0.2, 0.5, 0.8, 1.0, 1.5)


@dataclass(frozen=True)
class PyramidLevel:
    """One feature level: name, feature stride, anchor base size."""

    name: str
    stride: int
    base_size: int

    def __post_init__(self):
        if self.stride <= 0 or self.base_size <= 0:
            raise InvalidConfig(f"level {self.name}: stride and base_size must be > 0")


DEFAULT_LEVELS: tuple[PyramidLevel, ...] = (
    PyramidLevel("P3", 8, 32),
    PyramidLevel("P4", 16, 64),
    PyramidLevel("P5", 32, 128),
    PyramidLevel("P6", 64, 256),
    PyramidLevel("P7", 128, 512),
)


@dataclass(frozen=True)
class AnchorConfig:
    """Pyramid levels plus the ratio/scale sets shared by all levels."""

    levels: tuple[PyramidLevel, ...] = DEFAULT_LEVELS
    ratios: tuple[float, ...] = DEFAULT_RATIOS
    scales: tuple[float, ...] = DEFAULT_SCALES

    def __post_init__(self):
        if not self.levels:
            raise InvalidConfig("at least one pyramid level is required")
        strides = [lvl.stride for lvl in self.levels]
        bases = [lvl.base_size for lvl in self.levels]
        if any(b >= a for a, b in zip(strides[1:], strides)):
            raise InvalidConfig(f"strides must be strictly increasing, got {strides}")
        if any(b >= a for a, b in zip(bases[1:], bases)):
            raise InvalidConfig(f"base sizes must be strictly increasing, got {bases}")
        if not self.ratios or any(r <= 0 for r in self.ratios):
            raise InvalidConfig(f"ratios must be positive, got {self.ratios}")
        if not self.scales or any(s <= 0 for s in self.scales):
            raise InvalidConfig(f"scales must be positive, got {self.scales}")

    @property
    def anchors_per_location(self) -> int:
        return len(self.ratios) * len(self.scales)


DEFAULT_ANCHOR_CONFIG = AnchorConfig()


@dataclass(frozen=True)
class Anchor:
    """One anchor box with its level name and (row, col) grid cell."""

    bbox: BBox
    level: str
    cell: tuple[int, int]


def anchor_shape(base_size: float, scale: float, ratio: float) -> tuple[float, float]:
    """Anchor (width, height) for a base size, scale and h/w aspect ratio.

    The box area is (base_size * scale)**2 regardless of ratio:
    w = base_size * scale / sqrt(ratio), h = base_size * scale * sqrt(ratio).
    """
    if base_size <= 0 or scale <= 0 or ratio <= 0:
        raise InvalidConfig(
            f"base_size, scale and ratio must be > 0, got {(base_size, scale, ratio)}")
    side = base_size * scale
    root = math.sqrt(ratio)
    return side / root, side * root


def level_grid_size(input_w: int, input_h: int, stride: int) -> tuple[int, int]:
    """(rows, cols) of a level's feature grid: ceil division of the input."""
    if input_w <= 0 or input_h <= 0 or stride <= 0:
        raise InvalidConfig(
            f"input size and stride must be > 0, got {(input_w, input_h, stride)}")
    return math.ceil(input_h / stride), math.ceil(input_w / stride)


def iter_pyramid(cfg: AnchorConfig, input_w: int, input_h: int,
                 ) -> Iterator[tuple[PyramidLevel, int, int, float, float, BBox]]:
    """Yield (level, row, col, ratio, scale, bbox) in canonical order.

    Order is level-major, then row, col, ratio, scale; centers sit at
    ((col + 0.5) * stride, (row + 0.5) * stride). Boxes may extend outside
    the image; they are not clipped.
    """
    for lvl in cfg.levels:
        rows, cols = level_grid_size(input_w, input_h, lvl.stride)
        shapes = [(ratio, scale, anchor_shape(lvl.base_size, scale, ratio))
                  for ratio in cfg.ratios for scale in cfg.scales]
        for row in range(rows):
            cy = (row + 0.5) * lvl.stride
            for col in range(cols):
                cx = (col + 0.5) * lvl.stride
                for ratio, scale, (w, h) in shapes:
                    box = BBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
                    yield lvl, row, col, ratio, scale, box


def generate_pyramid(cfg: AnchorConfig, input_w: int, input_h: int) -> list[Anchor]:
    """All anchors for an input size, in the canonical deterministic order."""
    return [Anchor(box, lvl.name, (row, col))
            for lvl, row, col, _, _, box in iter_pyramid(cfg, input_w, input_h)]


def pyramid_size(cfg: AnchorConfig, input_w: int, input_h: int) -> int:
    """Anchor count = sum over levels of rows * cols * anchors_per_location."""
    total = 0
    for lvl in cfg.levels:
        rows, cols = level_grid_size(input_w, input_h, lvl.stride)
        total += rows * cols * cfg.anchors_per_location
    return total

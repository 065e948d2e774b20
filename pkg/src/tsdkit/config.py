"""Run configuration: one flat key=value file mirroring every default.

Unknown or duplicate keys are rejected; missing keys fall back to the
defaults below. The palette appears as sign_color_1..sign_color_20 plus
sky_color and ground_color, each an "r,g,b" triple.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .anchors import AnchorConfig, PyramidLevel
from .errors import InvalidConfig, ParseError
from .losses import FocalParams
from .synth import GROUND_COLOR, SIGN_COLORS, SKY_COLOR, Palette


@dataclass(frozen=True)
class RunConfig:
    anchor_level_names: tuple[str, ...] = ("P3", "P4", "P5", "P6", "P7")
    anchor_strides: tuple[int, ...] = (8, 16, 32, 64, 128)
    anchor_base_sizes: tuple[int, ...] = (32, 64, 128, 256, 512)
    anchor_ratios: tuple[float, ...] = (0.5, 1.0, 2.0)
    anchor_scales: tuple[float, ...] = (0.1, 0.2, 0.5, 0.8, 1.0, 1.5)
    assign_pos_iou: float = 0.5
    assign_neg_iou: float = 0.4
    focal_alpha: float = 0.25
    focal_gamma: float = 2.0
    smooth_l1_beta: float = 1.0 / 9.0
    crop_half_extent: int = 200
    crop_keep_fraction: float = 0.5
    scale_min: float = 0.8
    scale_max: float = 1.2
    tile_size: int = 400
    tile_overlap: int = 100
    nms_iou: float = 0.5
    iou_gate: float = 0.9
    image_width: int = 3200
    image_height: int = 1800
    sign_min_size: int = 30
    sign_max_size: int = 80
    clutter_count: int = 6
    snow_fraction: float = 0.02
    sign_color_jitter: int = 6
    detect_bg_tol: float = 60.0
    detect_color_tol: float = 25.0
    detect_min_area: int = 48
    detect_score_floor: float = 0.2
    sky_color: tuple[int, int, int] = SKY_COLOR
    ground_color: tuple[int, int, int] = GROUND_COLOR
    sign_colors: tuple[tuple[int, int, int], ...] = tuple(
        SIGN_COLORS[c] for c in sorted(SIGN_COLORS))

    def anchor_config(self) -> AnchorConfig:
        levels = tuple(PyramidLevel(n, s, b) for n, s, b in
                       zip(self.anchor_level_names, self.anchor_strides,
                           self.anchor_base_sizes))
        return AnchorConfig(levels, self.anchor_ratios, self.anchor_scales)

    def focal_params(self) -> FocalParams:
        return FocalParams(self.focal_alpha, self.focal_gamma)

    def palette(self) -> Palette:
        colors = {c + 1: rgb for c, rgb in enumerate(self.sign_colors)}
        return Palette(colors, self.sky_color, self.ground_color)

    def detector_kwargs(self) -> dict:
        return {"bg_tol": self.detect_bg_tol, "color_tol": self.detect_color_tol,
                "min_area": self.detect_min_area,
                "score_floor": self.detect_score_floor}

    def validate(self) -> "RunConfig":
        """Range-check every field; raises InvalidConfig on the first violation."""
        if not (len(self.anchor_level_names) == len(self.anchor_strides)
                == len(self.anchor_base_sizes)):
            raise InvalidConfig("anchor level name/stride/base lists differ in length")
        self.anchor_config()
        self.focal_params()
        if not 0.0 <= self.assign_neg_iou <= self.assign_pos_iou <= 1.0:
            raise InvalidConfig(
                f"need 0 <= assign_neg_iou <= assign_pos_iou <= 1, got "
                f"{self.assign_neg_iou}, {self.assign_pos_iou}")
        if self.smooth_l1_beta <= 0:
            raise InvalidConfig(f"smooth_l1_beta {self.smooth_l1_beta} must be > 0")
        if self.crop_half_extent <= 0:
            raise InvalidConfig(f"crop_half_extent {self.crop_half_extent} must be > 0")
        if not 0.0 <= self.crop_keep_fraction <= 1.0:
            raise InvalidConfig(f"crop_keep_fraction {self.crop_keep_fraction} outside [0, 1]")
        if not 0.0 < self.scale_min <= self.scale_max:
            raise InvalidConfig(f"need 0 < scale_min <= scale_max, got "
                                f"{self.scale_min}, {self.scale_max}")
        if not 0 <= self.tile_overlap < self.tile_size:
            raise InvalidConfig(f"need 0 <= tile_overlap < tile_size, got "
                                f"{self.tile_overlap}, {self.tile_size}")
        for name in ("nms_iou", "iou_gate", "detect_score_floor", "snow_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfig(f"{name} {value} outside [0, 1]")
        if self.image_width <= 0 or self.image_height <= 0:
            raise InvalidConfig(f"image size {self.image_width}x{self.image_height} "
                                "must be positive")
        if not 0 < self.sign_min_size <= self.sign_max_size:
            raise InvalidConfig(f"need 0 < sign_min_size <= sign_max_size, got "
                                f"{self.sign_min_size}, {self.sign_max_size}")
        if self.clutter_count < 0 or self.sign_color_jitter < 0:
            raise InvalidConfig("clutter_count and sign_color_jitter must be >= 0")
        if self.detect_bg_tol < 0 or self.detect_color_tol < 0:
            raise InvalidConfig("detector tolerances must be >= 0")
        if self.detect_min_area < 1:
            raise InvalidConfig(f"detect_min_area {self.detect_min_area} must be >= 1")
        if len(self.sign_colors) != len(SIGN_COLORS):
            raise InvalidConfig(f"expected {len(SIGN_COLORS)} sign colors, "
                                f"got {len(self.sign_colors)}")
        for label, rgb in [("sky_color", self.sky_color),
                           ("ground_color", self.ground_color),
                           *[(f"sign_color_{i + 1}", rgb)
                             for i, rgb in enumerate(self.sign_colors)]]:
            if len(rgb) != 3 or any(not 0 <= int(v) <= 255 for v in rgb):
                raise InvalidConfig(f"{label} must be r,g,b in 0..255, got {rgb}")
        return self

    def items(self) -> list[tuple[str, str]]:
        """(key, value) pairs in file syntax, palette keys expanded."""
        out: list[tuple[str, str]] = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "sign_colors":
                for idx, rgb in enumerate(value, start=1):
                    out.append((f"sign_color_{idx}", _fmt(rgb)))
            else:
                out.append((f.name, _fmt(value)))
        return out

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items())

    def describe(self) -> str:
        """Single-line effective-config echo."""
        return " ".join(f"{k}={v}" for k, v in self.items())


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_like(template, raw: str, key: str, line_no: int):
    raw = raw.strip()
    try:
        if isinstance(template, tuple):
            parts = [p.strip() for p in raw.split(",") if p.strip() != ""]
            elem = template[0]
            if isinstance(elem, tuple):
                raise ParseError(f"line {line_no}: {key} cannot be parsed as a flat list")
            vals = tuple(_parse_like(elem, p, key, line_no) for p in parts)
            if not vals:
                raise ParseError(f"line {line_no}: {key} must not be empty")
            return vals
        if isinstance(template, bool):
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        if isinstance(template, int):
            return int(raw)
        if isinstance(template, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ParseError(f"line {line_no}: bad value {raw!r} for {key}") from exc


def load_config(path) -> RunConfig:
    """Parse a key=value file; missing keys keep their defaults."""
    base = RunConfig()
    scalar_keys = {f.name: getattr(base, f.name) for f in fields(base)
                   if f.name != "sign_colors"}
    colors = list(base.sign_colors)
    color_keys = {f"sign_color_{i + 1}": i for i in range(len(colors))}

    updates: dict = {}
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ParseError(f"line {line_no}: expected key = value, got {text!r}")
            key, raw = text.split("=", 1)
            key = key.strip()
            if key in seen:
                raise ParseError(f"line {line_no}: duplicate key {key!r}")
            seen.add(key)
            if key in color_keys:
                rgb = _parse_like((0, 0, 0), raw, key, line_no)
                if len(rgb) != 3 or any(not 0 <= v <= 255 for v in rgb):
                    raise ParseError(f"line {line_no}: {key} must be r,g,b in 0..255")
                colors[color_keys[key]] = rgb
            elif key in ("sky_color", "ground_color"):
                rgb = _parse_like((0, 0, 0), raw, key, line_no)
                if len(rgb) != 3 or any(not 0 <= v <= 255 for v in rgb):
                    raise ParseError(f"line {line_no}: {key} must be r,g,b in 0..255")
                updates[key] = rgb
            elif key in scalar_keys:
                updates[key] = _parse_like(scalar_keys[key], raw, key, line_no)
            else:
                raise ParseError(f"line {line_no}: unknown key {key!r}")
    return replace(base, sign_colors=tuple(colors), **updates).validate()

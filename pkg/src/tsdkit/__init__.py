"""Tiled small-object detection toolkit.

Synthetic road scenes, anchor pyramids, box target coding, detection losses,
tiling and crop augmentation, tile merging, and strict-IoU evaluation, plus a
seeded end-to-end pipeline tying them together.
"""

from .anchors import (DEFAULT_LEVELS, DEFAULT_RATIOS, DEFAULT_SCALES, Anchor,
                      AnchorConfig, PyramidLevel, anchor_shape,
                      generate_pyramid, iter_pyramid, level_grid_size,
                      pyramid_size)
from .config import RunConfig, load_config
from .crops import (CropWindow, LabeledCrop, centered_crop, crop_with_labels,
                    extract, grid_tiles, hflip, random_tiles, rescale,
                    to_local)
from .errors import (DegenerateGeometry, ImageTooSmall, InvalidConfig,
                     InvalidInput, NumericalRange, ParseError,
                     PlacementFailure, TsdkitError)
from .evaluation import (CLASS_NAMES, ClassMetrics, GroundTruthRecord,
                         MatchResult, MetricsReport, evaluate_images,
                         format_report, group_by_image, match_image,
                         read_labels, read_predictions, score,
                         write_class_metrics_csv, write_labels,
                         write_predictions)
from .geometry import (BBox, Detection, Quad, bbox_to_quad, clip,
                       intersection_area, iou, iou_matrix, quad_to_bbox,
                       translate, translate_quad)
from .losses import (DEFAULT_FOCAL, FocalParams, focal_loss, focal_loss_grad,
                     smooth_l1, smooth_l1_term)
from .merging import TileDetections, merge_tiles, nms, to_global
from .pipeline import (ImageResult, PipelineResult, detect_image,
                       run_synthetic_pipeline, scene_spec_for)
from .ppm import read_ppm, write_ppm
from .synth import (DEFAULT_PALETTE, SIGN_COLORS, SIGN_SHAPES, WEATHERS,
                    Palette, SceneSpec, blob_detect, generate_scene)
from .targets import (IGNORE, NEGATIVE, AssignmentResult, BoxDelta,
                      assign_anchors, decode_box, encode_box)

__version__ = "0.1.0"

__all__ = [
    "Anchor", "AnchorConfig", "AssignmentResult", "BBox", "BoxDelta",
    "CLASS_NAMES", "ClassMetrics", "CropWindow", "DEFAULT_FOCAL",
    "DEFAULT_LEVELS", "DEFAULT_PALETTE", "DEFAULT_RATIOS", "DEFAULT_SCALES",
    "DegenerateGeometry", "Detection", "FocalParams", "GroundTruthRecord",
    "IGNORE", "ImageResult", "ImageTooSmall", "InvalidConfig", "InvalidInput",
    "LabeledCrop", "MatchResult", "MetricsReport", "NEGATIVE",
    "NumericalRange", "Palette", "ParseError", "PipelineResult",
    "PlacementFailure", "PyramidLevel", "Quad", "RunConfig", "SIGN_COLORS",
    "SIGN_SHAPES", "SceneSpec", "TileDetections", "TsdkitError", "WEATHERS",
    "anchor_shape", "assign_anchors", "bbox_to_quad", "blob_detect",
    "centered_crop", "clip", "crop_with_labels", "decode_box", "detect_image",
    "encode_box", "evaluate_images", "extract", "focal_loss",
    "focal_loss_grad", "format_report", "generate_pyramid", "generate_scene",
    "grid_tiles", "group_by_image", "hflip", "intersection_area", "iou",
    "iou_matrix", "iter_pyramid", "level_grid_size", "load_config",
    "match_image", "merge_tiles", "nms", "pyramid_size", "quad_to_bbox",
    "random_tiles", "read_labels", "read_ppm", "read_predictions", "rescale",
    "run_synthetic_pipeline", "scene_spec_for", "score", "smooth_l1",
    "smooth_l1_term", "to_global", "to_local", "translate", "translate_quad",
    "write_class_metrics_csv", "write_labels", "write_ppm",
    "write_predictions",
]

"""Box regression coding and anchor-to-ground-truth assignment."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidInput, NumericalRange
from .geometry import BBox, iou_matrix

# Anchor labels: a value >= 0 is the assigned ground-truth index.
NEGATIVE = -1
IGNORE = -2


@dataclass(frozen=True)
class BoxDelta:
    """Regression target (tx, ty, tw, th) of a gt box relative to an anchor."""

    tx: float
    ty: float
    tw: float
    th: float

    def __post_init__(self):
        vals = (self.tx, self.ty, self.tw, self.th)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput(f"non-finite delta {vals}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.tx, self.ty, self.tw, self.th)


@dataclass(frozen=True)
class AssignmentResult:
    """Per-anchor labels plus regression deltas for the positive anchors.

    labels[i] is the gt index for a positive anchor, NEGATIVE (-1) for
    background, or IGNORE (-2) for anchors excluded from the loss. deltas
    maps each positive anchor index to encode_box(gt, anchor).
    """

    labels: tuple[int, ...]
    deltas: Mapping[int, BoxDelta]

    @property
    def num_positive(self) -> int:
        return sum(1 for v in self.labels if v >= 0)

    @property
    def num_negative(self) -> int:
        return sum(1 for v in self.labels if v == NEGATIVE)

    @property
    def num_ignored(self) -> int:
        return sum(1 for v in self.labels if v == IGNORE)


def encode_box(gt: BBox, anchor: BBox) -> BoxDelta:
    """Code a gt box as offsets from an anchor.

    tx = (gx - ax) / aw, ty = (gy - ay) / ah,
    tw = ln(gw / aw),    th = ln(gh / ah),
    with (gx, gy, gw, gh) the gt center/size and (ax, ay, aw, ah) the
    anchor's. decode_box is the exact inverse.
    """
    ax, ay = anchor.center
    gx, gy = gt.center
    return BoxDelta((gx - ax) / anchor.width,
                    (gy - ay) / anchor.height,
                    math.log(gt.width / anchor.width),
                    math.log(gt.height / anchor.height))


def decode_box(delta: BoxDelta, anchor: BBox) -> BBox:
    """Invert encode_box; raises NumericalRange if exp overflows."""
    try:
        w = anchor.width * math.exp(delta.tw)
        h = anchor.height * math.exp(delta.th)
    except OverflowError as exc:
        raise NumericalRange(f"decoded size overflows: {delta}") from exc
    ax, ay = anchor.center
    cx = ax + delta.tx * anchor.width
    cy = ay + delta.ty * anchor.height
    vals = (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    if not all(math.isfinite(v) for v in vals) or w <= 0 or h <= 0:
        raise NumericalRange(f"decoded box left the float range: {vals}")
    return BBox(*vals)


def _as_bbox(a) -> BBox:
    # Accepts Anchor-like objects (with a .bbox) or plain boxes.
    return getattr(a, "bbox", a)


def assign_anchors(anchors: Sequence, gts: Sequence[BBox],
                   pos_thresh: float = 0.5, neg_thresh: float = 0.4,
                   ) -> AssignmentResult:
    """Partition anchors into positive / negative / ignore against gt boxes.

    Args:
        anchors: Anchor objects or plain BBox values; must be non-empty.
        gts: ground-truth boxes; may be empty (everything becomes negative).
        pos_thresh: IoU at or above which an anchor is positive.
        neg_thresh: IoU below which an anchor is negative; anchors between
            the thresholds are ignored.

    Every anchor gets exactly one label. Positives are assigned their
    highest-IoU gt (ties to the lowest gt index). Additionally each gt with
    any overlap is force-matched to its highest-IoU anchor (ties to the
    lowest anchor index) even when that IoU is below pos_thresh, so no
    overlapping gt goes unmatched; a force-match contested by several gts
    resolves to the lowest gt index.
    """
    if not 0.0 <= neg_thresh <= pos_thresh <= 1.0:
        raise InvalidConfig(
            f"need 0 <= neg_thresh <= pos_thresh <= 1, got {(neg_thresh, pos_thresh)}")
    if len(anchors) == 0:
        raise InvalidInput("empty anchor list")
    boxes = [_as_bbox(a) for a in anchors]
    n = len(boxes)
    if len(gts) == 0:
        return AssignmentResult(labels=(NEGATIVE,) * n, deltas={})

    ious = iou_matrix(boxes, list(gts))
    best_gt = ious.argmax(axis=1)
    best_iou = ious[np.arange(n), best_gt]

    labels = np.full(n, IGNORE, dtype=np.int64)
    labels[best_iou < neg_thresh] = NEGATIVE
    pos = best_iou >= pos_thresh
    labels[pos] = best_gt[pos]

    # Force-match: lowest gt index wins a contested anchor, so iterate in
    # ascending gt order and only take anchors not already forced.
    forced: dict[int, int] = {}
    for g in range(len(gts)):
        a_best = int(ious[:, g].argmax())
        if ious[a_best, g] > 0.0 and a_best not in forced:
            forced[a_best] = g
    for a_idx, g in forced.items():
        labels[a_idx] = g

    deltas = {i: encode_box(gts[int(labels[i])], boxes[i])
              for i in range(n) if labels[i] >= 0}
    return AssignmentResult(labels=tuple(int(v) for v in labels), deltas=deltas)

"""Competition-style evaluation: CSV ingestion, matching, F1 scoring.

CSV formats (comma-separated, UTF-8, one header row):

    ground truth: filename,x1,y1,x2,y2,x3,y3,x4,y4,type
    predictions:  filename,x1,y1,x2,y2,x3,y3,x4,y4,type,score

(x1..y4) are quad corners, `type` is a class id in [0, 20]. A prediction
matches a ground truth only when the IoU of their axis-aligned hulls is
strictly greater than the gate (default 0.9).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DegenerateGeometry, ParseError
from .geometry import BBox, Detection, Quad, bbox_to_quad, iou, quad_to_bbox

GT_HEADER = ("filename", "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4", "type")
PRED_HEADER = GT_HEADER + ("score",)

# Label dictionary for the 21 sign classes.
CLASS_NAMES: dict[int, str] = {
    0: "others",
    1: "parking lot",
    2: "yield to parking",
    3: "driving on the right",
    4: "left or right turn",
    5: "bus passage",
    6: "driving on the left",
    7: "slow down",
    8: "through or right turn (motorized)",
    9: "yield to pedestrians",
    10: "roundabout",
    11: "through or right turn",
    12: "no bus access",
    13: "no motorcycles",
    14: "no motor vehicles",
    15: "no non-motor vehicles",
    16: "no honking",
    17: "through or bypass turn",
    18: "40 km/h speed limit",
    19: "30 km/h speed limit",
    20: "honking",
}


@dataclass(frozen=True)
class GroundTruthRecord:
    """One labeled sign: source image, corner quad, class id."""

    filename: str
    quad: Quad
    class_id: int

    @property
    def hull(self) -> BBox:
        return quad_to_bbox(self.quad)


@dataclass(frozen=True)
class MatchResult:
    """Greedy matching outcome: (pred, gt, iou) pairs plus leftovers."""

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_preds: tuple[int, ...]
    unmatched_gts: tuple[int, ...]


@dataclass(frozen=True)
class ClassMetrics:
    """TP/FP/FN counts for one class; rates derive from the counts."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision_defined(self) -> bool:
        return self.tp + self.fp > 0

    @property
    def recall_defined(self) -> bool:
        return self.tp + self.fn > 0

    @property
    def precision(self) -> float:
        # Undefined ratios are reported as 0.0; check the *_defined flags.
        return self.tp / (self.tp + self.fp) if self.precision_defined else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.recall_defined else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class MetricsReport:
    """Overall counts, per-class counts and gt->pred confusion tallies."""

    tp: int
    fp: int
    fn: int
    per_class: Mapping[int, ClassMetrics] = field(default_factory=dict)
    confusions: Mapping[tuple[int, int], int] = field(default_factory=dict)

    @property
    def precision_defined(self) -> bool:
        return self.tp + self.fp > 0

    @property
    def recall_defined(self) -> bool:
        return self.tp + self.fn > 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.precision_defined else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.recall_defined else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _parse_class(raw: str, line_no: int) -> int:
    try:
        class_id = int(raw)
    except ValueError as exc:
        raise ParseError(f"line {line_no}: class {raw!r} is not an integer") from exc
    if not 0 <= class_id <= 20:
        raise ParseError(f"line {line_no}: class {class_id} outside [0, 20]")
    return class_id


def _parse_quad(row: Sequence[str], line_no: int) -> Quad:
    try:
        coords = [float(v) for v in row]
    except ValueError as exc:
        raise ParseError(f"line {line_no}: non-numeric coordinate in {row!r}") from exc
    quad = Quad.from_flat(*coords)
    try:
        quad_to_bbox(quad)
    except DegenerateGeometry as exc:
        # Corrupt labels fail loud at ingestion instead of being fixed up.
        raise ParseError(f"line {line_no}: degenerate quad: {exc}") from exc
    return quad


def _check_header(row: Sequence[str] | None, expected: tuple[str, ...], kind: str):
    if row is None:
        raise ParseError(f"line 1: empty {kind} file, expected header")
    got = tuple(v.strip().lower() for v in row)
    if got != expected:
        raise ParseError(f"line 1: bad {kind} header {row!r}")


def read_labels(path) -> list[GroundTruthRecord]:
    """Parse a ground-truth CSV; raises ParseError with the offending line."""
    records: list[GroundTruthRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, GT_HEADER, "ground truth")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(GT_HEADER):
                raise ParseError(f"line {line_no}: expected {len(GT_HEADER)} fields, got {len(row)}")
            quad = _parse_quad(row[1:9], line_no)
            class_id = _parse_class(row[9], line_no)
            records.append(GroundTruthRecord(row[0], quad, class_id))
    return records


def read_predictions(path) -> list[tuple[str, Detection]]:
    """Parse a prediction CSV into (filename, Detection) rows, order kept."""
    rows: list[tuple[str, Detection]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        _check_header(header, PRED_HEADER, "prediction")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PRED_HEADER):
                raise ParseError(f"line {line_no}: expected {len(PRED_HEADER)} fields, got {len(row)}")
            quad = _parse_quad(row[1:9], line_no)
            class_id = _parse_class(row[9], line_no)
            try:
                score = float(row[10])
            except ValueError as exc:
                raise ParseError(f"line {line_no}: score {row[10]!r} is not a number") from exc
            if not 0.0 <= score <= 1.0:
                raise ParseError(f"line {line_no}: score {score} outside [0, 1]")
            rows.append((row[0], Detection(quad_to_bbox(quad), class_id, score)))
    return rows


def format_number(v: float) -> str:
    """Integral floats print as ints, everything else at full precision."""
    f = float(v)
    if f.is_integer():
        return str(int(f))
    return repr(f)


def write_labels(path, records: Sequence[GroundTruthRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GT_HEADER)
        for rec in records:
            writer.writerow([rec.filename,
                             *[format_number(v) for v in rec.quad.flat()],
                             rec.class_id])


def write_predictions(path, rows: Sequence[tuple[str, Detection]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(PRED_HEADER)
        for filename, det in rows:
            quad = bbox_to_quad(det.bbox)
            writer.writerow([filename,
                             *[format_number(v) for v in quad.flat()],
                             det.class_id, format_number(det.score)])


def group_by_image(items: Sequence) -> dict[str, list]:
    """Group (filename, value) pairs or records with .filename by filename."""
    grouped: dict[str, list] = {}
    for item in items:
        if isinstance(item, tuple):
            name, value = item
        else:
            name, value = item.filename, item
        grouped.setdefault(name, []).append(value)
    return grouped


def match_image(preds: Sequence[Detection], gts: Sequence[GroundTruthRecord],
                iou_gate: float = 0.9) -> MatchResult:
    """Greedy one-to-one matching for a single image.

    Predictions are visited by descending score (ties: input order); each
    takes the unmatched gt with the highest hull IoU strictly above the
    gate (ties: lowest gt index). An IoU of exactly the gate never matches.
    """
    hulls = [g.hull for g in gts]
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].score, i))
    taken = [False] * len(gts)
    pairs: list[tuple[int, int, float]] = []
    for pi in order:
        best_gi = -1
        best_iou = iou_gate
        for gi, hull in enumerate(hulls):
            if taken[gi]:
                continue
            v = iou(preds[pi].bbox, hull)
            if v > best_iou:
                best_gi, best_iou = gi, v
        if best_gi >= 0:
            taken[best_gi] = True
            pairs.append((pi, best_gi, best_iou))
    pairs.sort()
    matched_preds = {pi for pi, _, _ in pairs}
    return MatchResult(
        pairs=tuple(pairs),
        unmatched_preds=tuple(i for i in range(len(preds)) if i not in matched_preds),
        unmatched_gts=tuple(i for i in range(len(gts)) if not taken[i]))


def score(matches: MatchResult, preds: Sequence[Detection],
          gts: Sequence[GroundTruthRecord]) -> MetricsReport:
    """Turn a matching into counts: TP needs a match *and* the right class.

    FP counts every other prediction (unmatched or matched to a different
    class); FN counts every gt without a correct-class match. Matched pairs
    with differing classes are tallied as (gt_class -> pred_class)
    confusions.
    """
    per_class_tp: dict[int, int] = {}
    per_class_fp: dict[int, int] = {}
    per_class_fn: dict[int, int] = {}
    confusions: dict[tuple[int, int], int] = {}
    tp = 0
    correct_gts = set()
    matched_preds = set()
    for pi, gi, _ in matches.pairs:
        matched_preds.add(pi)
        pc, gc = preds[pi].class_id, gts[gi].class_id
        if pc == gc:
            tp += 1
            correct_gts.add(gi)
            per_class_tp[pc] = per_class_tp.get(pc, 0) + 1
        else:
            confusions[(gc, pc)] = confusions.get((gc, pc), 0) + 1
            per_class_fp[pc] = per_class_fp.get(pc, 0) + 1
    for pi, p in enumerate(preds):
        if pi not in matched_preds:
            per_class_fp[p.class_id] = per_class_fp.get(p.class_id, 0) + 1
    for gi, g in enumerate(gts):
        if gi not in correct_gts:
            per_class_fn[g.class_id] = per_class_fn.get(g.class_id, 0) + 1

    classes = sorted(set(per_class_tp) | set(per_class_fp) | set(per_class_fn))
    per_class = {c: ClassMetrics(per_class_tp.get(c, 0),
                                 per_class_fp.get(c, 0),
                                 per_class_fn.get(c, 0))
                 for c in classes}
    return MetricsReport(tp=tp, fp=len(preds) - tp, fn=len(gts) - tp,
                         per_class=per_class, confusions=confusions)


def aggregate(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Micro-average: sum all counts, then rates derive from the sums."""
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    per_class_acc: dict[int, list[int]] = {}
    confusions: dict[tuple[int, int], int] = {}
    for r in reports:
        for c, m in r.per_class.items():
            acc = per_class_acc.setdefault(c, [0, 0, 0])
            acc[0] += m.tp
            acc[1] += m.fp
            acc[2] += m.fn
        for key, n in r.confusions.items():
            confusions[key] = confusions.get(key, 0) + n
    per_class = {c: ClassMetrics(*acc) for c, acc in sorted(per_class_acc.items())}
    return MetricsReport(tp=tp, fp=fp, fn=fn, per_class=per_class,
                         confusions=confusions)


def evaluate_images(preds_by_image: Mapping[str, Sequence[Detection]],
                    gts_by_image: Mapping[str, Sequence[GroundTruthRecord]],
                    iou_gate: float = 0.9,
                    ) -> tuple[MetricsReport, dict[str, MetricsReport]]:
    """Match and score every image, then micro-aggregate."""
    per_image: dict[str, MetricsReport] = {}
    for name in sorted(set(preds_by_image) | set(gts_by_image)):
        preds = list(preds_by_image.get(name, ()))
        gts = list(gts_by_image.get(name, ()))
        per_image[name] = score(match_image(preds, gts, iou_gate), preds, gts)
    return aggregate(list(per_image.values())), per_image


def format_report(report: MetricsReport) -> str:
    """Human-readable multi-line summary of a MetricsReport."""
    lines = [
        f"overall: tp={report.tp} fp={report.fp} fn={report.fn} "
        f"precision={report.precision:.6f} recall={report.recall:.6f} "
        f"f1={report.f1:.6f}"
    ]
    if not report.precision_defined:
        lines.append("note: precision undefined (no predictions), reported as 0")
    if not report.recall_defined:
        lines.append("note: recall undefined (no ground truth), reported as 0")
    for c, m in sorted(report.per_class.items()):
        name = CLASS_NAMES.get(c, "?")
        lines.append(f"class {c:2d} ({name}): tp={m.tp} fp={m.fp} fn={m.fn} "
                     f"precision={m.precision:.6f} recall={m.recall:.6f} f1={m.f1:.6f}")
    for (gc, pc), n in sorted(report.confusions.items()):
        lines.append(f"confusion: gt {gc} -> pred {pc}: {n}")
    return "\n".join(lines)


def write_class_metrics_csv(path, report: MetricsReport) -> None:
    """Machine-readable per-class metrics, with an `overall` summary row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "tp", "fp", "fn", "precision", "recall", "f1"])
        for c, m in sorted(report.per_class.items()):
            writer.writerow([c, m.tp, m.fp, m.fn,
                             repr(m.precision), repr(m.recall), repr(m.f1)])
        writer.writerow(["overall", report.tp, report.fp, report.fn,
                         repr(report.precision), repr(report.recall), repr(report.f1)])

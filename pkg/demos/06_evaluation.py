"""Score predictions against ground truth with the strict-gate protocol.

A prediction only counts as a true positive when its IoU with a ground-truth
box is strictly greater than the gate (default 0.9) AND the class matches.
A matched box with the wrong class becomes a confusion plus an FP and an FN.
Run: python3 demos/06_evaluation.py
"""

from tsdkit import (
    BBox,
    Detection,
    GroundTruthRecord,
    bbox_to_quad,
    evaluate_images,
    format_report,
    iou,
    match_image,
    score,
)


def gt(box: BBox, class_id: int) -> GroundTruthRecord:
    return GroundTruthRecord("img.ppm", bbox_to_quad(box), class_id)


def main():
    gts = [
        gt(BBox(100, 100, 150, 150), 3),
        gt(BBox(300, 200, 360, 260), 7),
        gt(BBox(500, 400, 540, 440), 18),
    ]
    preds = [
        # exact hit
        Detection(BBox(100, 100, 150, 150), 3, 0.95),
        # perfect box, wrong class: a confusion plus an FP and an FN
        Detection(BBox(500, 400, 540, 440), 19, 0.90),
        # IoU 0.84 with gt 1: below the 0.9 gate, so just an FP
        Detection(BBox(305, 205, 360, 260), 7, 0.80),
    ]

    matches = match_image(preds, gts, iou_gate=0.9)
    for pi, gi, v in matches.pairs:
        print(f"pred {pi} -> gt {gi}  IoU={v:.4f}")
    print(f"unmatched preds: {matches.unmatched_preds}"
          f"  unmatched gts: {matches.unmatched_gts}")

    report = score(matches, preds, gts)
    print()
    print(format_report(report))

    # the gate is strict: IoU exactly 0.9 does not match
    g = [gt(BBox(0, 0, 10, 10), 1)]
    p = [Detection(BBox(0, 0, 10, 9), 1, 1.0)]
    v = iou(p[0].bbox, g[0].hull)
    at_gate = match_image(p, g, iou_gate=0.9)
    print(f"\nIoU={v}: matches at gate 0.9? {bool(at_gate.pairs)}")

    # aggregation across images is micro: sum counts, then divide
    overall, per_image = evaluate_images(
        {"img.ppm": preds, "empty.ppm": []},
        {"img.ppm": gts, "empty.ppm": []},
        iou_gate=0.9)
    print(f"micro over {len(per_image)} images: f1={overall.f1:.4f}"
          f" (tp={overall.tp} fp={overall.fp} fn={overall.fn})")


if __name__ == "__main__":
    main()

"""Assign anchors to ground truth and compute training targets and losses.

Shows the positive/ignore/negative split, the box delta encoding, and the
focal + smooth L1 loss values for a toy scene.
Run: python3 demos/03_target_assignment.py
"""

from tsdkit import (
    AnchorConfig,
    BBox,
    BoxDelta,
    FocalParams,
    assign_anchors,
    decode_box,
    encode_box,
    focal_loss,
    generate_pyramid,
    smooth_l1,
)


def main():
    anchors = generate_pyramid(AnchorConfig(), 400, 400)
    gts = [BBox(100, 100, 140, 140), BBox(250, 180, 290, 240)]

    result = assign_anchors(anchors, gts)
    print(f"{len(anchors)} anchors, {len(gts)} ground-truth boxes")
    print(f"  positive: {result.num_positive}")
    print(f"  ignored:  {result.num_ignored}")
    print(f"  negative: {result.num_negative}")

    # deltas for one positive anchor, and the exact round trip back
    pos = min(result.deltas)
    gt = gts[result.labels[pos]]
    anchor = anchors[pos].bbox
    delta = result.deltas[pos]
    back = decode_box(delta, anchor)
    print(f"\nanchor {pos} ({anchors[pos].level}) -> gt {result.labels[pos]}")
    print(f"  anchor [{anchor.xmin:.1f}, {anchor.ymin:.1f},"
          f" {anchor.xmax:.1f}, {anchor.ymax:.1f}]")
    print(f"  deltas (tx, ty, tw, th) = ({delta.tx:+.4f}, {delta.ty:+.4f},"
          f" {delta.tw:+.4f}, {delta.th:+.4f})")
    print(f"  decoded back: [{back.xmin:.4f}, {back.ymin:.4f},"
          f" {back.xmax:.4f}, {back.ymax:.4f}]  (gt was"
          f" [{gt.xmin:.1f}, {gt.ymin:.1f}, {gt.xmax:.1f}, {gt.ymax:.1f}])")
    assert encode_box(gt, anchor) == delta

    # classification loss: well-classified examples are heavily down-weighted
    params = FocalParams(alpha=0.25, gamma=2.0)
    print("\nfocal loss for a positive anchor (y=1):")
    for p in (0.1, 0.5, 0.9, 0.99):
        print(f"  p={p:4.2f}  loss={focal_loss(p, 1, params):10.6f}")

    print("regression loss, single nonzero residual:")
    target = BoxDelta(0.0, 0.0, 0.0, 0.0)
    for r in (0.01, 0.1, 0.5, 2.0):
        loss = smooth_l1(BoxDelta(r, 0.0, 0.0, 0.0), target)
        print(f"  residual {r:4.2f}  smooth_l1={loss:.6f}")


if __name__ == "__main__":
    main()

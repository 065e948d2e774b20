"""Walk the anchor pyramid: grid shapes per level, counts, and a few boxes.

Run: python3 demos/02_anchor_pyramid.py
"""

import numpy as np

from tsdkit import (
    AnchorConfig,
    anchor_shape,
    generate_pyramid,
    level_grid_size,
    pyramid_size,
)


def main():
    cfg = AnchorConfig()
    w, h = 400, 400

    print(f"input {w}x{h}")
    for lvl in cfg.levels:
        rows, cols = level_grid_size(w, h, lvl.stride)
        count = rows * cols * cfg.anchors_per_location
        print(f"  {lvl.name} stride {lvl.stride:3d} base {lvl.base_size:3d}:"
              f" grid {rows:2d}x{cols:2d} -> {count:6d} anchors")
    print(f"  total {pyramid_size(cfg, w, h)}")

    anchors = generate_pyramid(cfg, w, h)
    assert len(anchors) == pyramid_size(cfg, w, h)

    print("\nfirst three anchors (P3, cell (0, 0), centered at (4, 4)):")
    for a in anchors[:3]:
        box = a.bbox
        print(f"  {a.level} [{box.xmin:8.2f} {box.ymin:8.2f} {box.xmax:8.2f}"
              f" {box.ymax:8.2f}]  w={box.width:.2f} h={box.height:.2f}")

    # shapes preserve area: w * h == (base * scale)^2 regardless of ratio
    print("\nbase 64, scale 0.5:")
    for ratio in cfg.ratios:
        aw, ah = anchor_shape(64, 0.5, ratio)
        print(f"  ratio {ratio}: {aw:6.2f} x {ah:6.2f}"
              f"  area={aw * ah:8.2f}  h/w={ah / aw:.3f}")

    # square anchors span 3.2 px (P3 at scale 0.1) to 768 px (P7 at 1.5)
    sides = sorted({lvl.base_size * s for lvl in cfg.levels
                    for s in cfg.scales})
    print("\nsquare anchor side lengths:", np.array(sides))


if __name__ == "__main__":
    main()

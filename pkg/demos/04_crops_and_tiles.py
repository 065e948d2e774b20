"""Cut training crops and inference tiles out of a large synthetic frame.

Covers centered crops with label rewriting, horizontal flip, rescaling,
and the overlapping grid used to tile a full frame.
Run: python3 demos/04_crops_and_tiles.py
"""

from tsdkit import (
    SceneSpec,
    centered_crop,
    crop_with_labels,
    extract,
    generate_scene,
    grid_tiles,
    hflip,
    quad_to_bbox,
    random_tiles,
    rescale,
)


def main():
    spec = SceneSpec(seed=21, n_signs=6)
    img, records = generate_scene(spec)
    h, w = img.shape[:2]
    labels = [(r.quad, r.class_id) for r in records]
    print(f"frame {w}x{h} with {len(records)} signs")

    # a training crop centered on the first sign
    win = centered_crop(records[0].hull, w, h, half_extent=200)
    crop = crop_with_labels(img, labels, win)
    print(f"\ncrop at ({win.x0}, {win.y0}) size {win.w}x{win.h}"
          f" keeps {len(crop.labels)} of {len(labels)} labels")
    for quad, class_id in crop.labels:
        hull = quad_to_bbox(quad)
        print(f"  class {class_id:2d} local"
              f" [{hull.xmin:.0f}, {hull.ymin:.0f},"
              f" {hull.xmax:.0f}, {hull.ymax:.0f}]")

    small = rescale(hflip(crop), 0.5)
    hull = quad_to_bbox(small.labels[0][0])
    print(f"after hflip + 0.5x rescale: image {small.image.shape[1]}x"
          f"{small.image.shape[0]}, first hull"
          f" [{hull.xmin:.1f}, {hull.ymin:.1f},"
          f" {hull.xmax:.1f}, {hull.ymax:.1f}]")

    # inference tiling: overlapping 400x400 windows covering the frame
    windows = grid_tiles(w, h, tile=400, overlap=100)
    cols = len({t.x0 for t in windows})
    rows = len({t.y0 for t in windows})
    print(f"\ngrid tiling: {len(windows)} tiles ({cols} cols x {rows} rows)")
    print("  first row origins:", [t.x0 for t in windows[:cols]])
    print("  last tile origin: ", (windows[-1].x0, windows[-1].y0))

    tiles = [extract(img, t) for t in windows]
    assert all(t.shape == (400, 400, 3) for t in tiles)

    rnd = random_tiles(w, h, n=3, seed=5)
    print("  random tile origins:", [(t.x0, t.y0) for t in rnd])


if __name__ == "__main__":
    main()

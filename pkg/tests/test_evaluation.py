"""CSV ingestion, strict-gate matching, and micro-averaged F1 scoring."""

import numpy as np
import pytest

from tsdkit.errors import ParseError
from tsdkit.evaluation import (CLASS_NAMES, ClassMetrics, GroundTruthRecord,
                               MetricsReport, aggregate, evaluate_images,
                               format_number, format_report, group_by_image,
                               match_image, read_labels, read_predictions,
                               score, write_class_metrics_csv, write_labels,
                               write_predictions)
from tsdkit.geometry import BBox, Detection, bbox_to_quad, iou


def gt(x0, y0, side, cid, filename="img.ppm"):
    return GroundTruthRecord(filename, bbox_to_quad(BBox(x0, y0, x0 + side, y0 + side)), cid)


def det(x0, y0, side, cid, s):
    return Detection(BBox(x0, y0, x0 + side, y0 + side), cid, s)


GT_CSV = """filename,x1,y1,x2,y2,x3,y3,x4,y4,type
a.ppm,10,10,40,10,10,40,40,40,3
a.ppm,100,100,130,100,100,130,130,130,5
b.ppm,50,60,80,60,50,90,80,90,20
"""

PRED_CSV = """filename,x1,y1,x2,y2,x3,y3,x4,y4,type,score
a.ppm,10,10,40,10,10,40,40,40,3,0.9
b.ppm,50,60,80,60,50,90,80,90,20,0.75
"""


class TestParsing:
    def test_read_labels(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text(GT_CSV)
        recs = read_labels(p)
        assert len(recs) == 3
        assert recs[0].filename == "a.ppm"
        assert recs[0].class_id == 3
        assert recs[0].hull.as_tuple() == (10.0, 10.0, 40.0, 40.0)

    def test_read_predictions(self, tmp_path):
        p = tmp_path / "pred.csv"
        p.write_text(PRED_CSV)
        rows = read_predictions(p)
        assert len(rows) == 2
        name, d = rows[0]
        assert name == "a.ppm" and d.class_id == 3 and d.score == 0.9

    def test_bad_header(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text("filename,x1,y1\n")
        with pytest.raises(ParseError, match="line 1"):
            read_labels(p)

    def test_bad_class_reports_line(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text(GT_CSV.replace("130,130,5", "130,130,21"))
        with pytest.raises(ParseError, match="line 3"):
            read_labels(p)

    def test_non_numeric_coordinate(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text(GT_CSV.replace("50,60,80", "oops,60,80"))
        with pytest.raises(ParseError, match="line 4"):
            read_labels(p)

    def test_degenerate_quad_rejected(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text("filename,x1,y1,x2,y2,x3,y3,x4,y4,type\n"
                     "a.ppm,10,10,10,10,10,10,10,10,3\n")
        with pytest.raises(ParseError, match="line 2"):
            read_labels(p)

    def test_score_out_of_range(self, tmp_path):
        p = tmp_path / "pred.csv"
        p.write_text(PRED_CSV.replace("0.75", "1.75"))
        with pytest.raises(ParseError, match="line 3"):
            read_predictions(p)

    def test_wrong_field_count(self, tmp_path):
        p = tmp_path / "gt.csv"
        p.write_text(GT_CSV + "c.ppm,1,2,3\n")
        with pytest.raises(ParseError, match="line 5"):
            read_labels(p)

    def test_round_trip(self, tmp_path):
        src = tmp_path / "gt.csv"
        src.write_text(GT_CSV)
        recs = read_labels(src)
        dst = tmp_path / "copy.csv"
        write_labels(dst, recs)
        assert read_labels(dst) == recs
        assert dst.read_text() == GT_CSV

    def test_predictions_round_trip(self, tmp_path):
        src = tmp_path / "pred.csv"
        src.write_text(PRED_CSV)
        rows = read_predictions(src)
        dst = tmp_path / "copy.csv"
        write_predictions(dst, rows)
        assert read_predictions(dst) == rows

    def test_format_number(self):
        assert format_number(3.0) == "3"
        assert format_number(3.5) == "3.5"
        assert format_number(-2.0) == "-2"


class TestGrouping:
    def test_group_records(self):
        recs = [gt(0, 0, 5, 1, "b"), gt(0, 0, 5, 2, "a"), gt(9, 9, 5, 3, "b")]
        grouped = group_by_image(recs)
        assert list(grouped) == ["b", "a"]
        assert [r.class_id for r in grouped["b"]] == [1, 3]

    def test_group_tuples(self):
        rows = [("a", 1), ("b", 2), ("a", 3)]
        grouped = group_by_image(rows)
        assert grouped == {"a": [1, 3], "b": [2]}


class TestMatching:
    def test_exact_match(self):
        m = match_image([det(10, 10, 30, 3, 0.9)], [gt(10, 10, 30, 3)])
        assert m.pairs == ((0, 0, 1.0),)
        assert m.unmatched_preds == () and m.unmatched_gts == ()

    def test_gate_is_strict(self):
        # IoU exactly 0.9 must not match
        g = GroundTruthRecord("i", bbox_to_quad(BBox(0, 0, 10, 10)), 1)
        p = Detection(BBox(0, 0, 10, 9), 1, 0.8)
        assert iou(p.bbox, g.hull) == 0.9
        m = match_image([p], [g])
        assert m.pairs == ()
        assert m.unmatched_preds == (0,) and m.unmatched_gts == (0,)

    def test_just_above_gate_matches(self):
        g = GroundTruthRecord("i", bbox_to_quad(BBox(0, 0, 100, 100)), 1)
        p = Detection(BBox(0, 0, 100, 91), 1, 0.8)
        m = match_image([p], [g])
        assert len(m.pairs) == 1

    def test_one_to_one(self):
        # two identical preds, one gt: only the higher-score pred matches
        g = gt(0, 0, 50, 1)
        p_hi = det(0, 0, 50, 1, 0.9)
        p_lo = det(0, 0, 50, 1, 0.5)
        m = match_image([p_lo, p_hi], [g])
        assert m.pairs == ((1, 0, 1.0),)
        assert m.unmatched_preds == (0,)

    def test_score_ties_input_order(self):
        g = gt(0, 0, 50, 1)
        m = match_image([det(0, 0, 50, 1, 0.7), det(0, 0, 50, 2, 0.7)], [g])
        assert m.pairs == ((0, 0, 1.0),)

    def test_class_blind(self):
        # matching ignores class; scoring handles the mismatch
        m = match_image([det(0, 0, 50, 2, 0.9)], [gt(0, 0, 50, 1)])
        assert len(m.pairs) == 1

    def test_empty_inputs(self):
        m = match_image([], [])
        assert m.pairs == () and m.unmatched_preds == () and m.unmatched_gts == ()


class TestScoring:
    def test_one_gt_two_preds(self):
        gts = [gt(0, 0, 50, 7)]
        preds = [det(0, 0, 50, 7, 0.9), det(200, 200, 50, 7, 0.8)]
        rep = score(match_image(preds, gts), preds, gts)
        assert (rep.tp, rep.fp, rep.fn) == (1, 1, 0)
        assert rep.precision == 0.5
        assert rep.recall == 1.0
        assert rep.f1 == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_wrong_class_is_confusion_plus_fp_fn(self):
        gts = [gt(0, 0, 50, 18)]
        preds = [det(0, 0, 50, 19, 0.9)]
        rep = score(match_image(preds, gts), preds, gts)
        assert (rep.tp, rep.fp, rep.fn) == (0, 1, 1)
        assert rep.confusions == {(18, 19): 1}
        assert rep.per_class[19].fp == 1
        assert rep.per_class[18].fn == 1

    def test_miss_is_fn(self):
        gts = [gt(0, 0, 50, 3)]
        rep = score(match_image([], gts), [], gts)
        assert (rep.tp, rep.fp, rep.fn) == (0, 0, 1)
        assert rep.recall == 0.0
        assert not rep.precision_defined
        assert rep.precision == 0.0

    def test_f1_from_known_rates(self):
        # precision 0.9, recall 0.8
        rep = MetricsReport(tp=36, fp=4, fn=9, per_class={}, confusions={})
        assert rep.precision == pytest.approx(0.9, abs=1e-15)
        assert rep.recall == pytest.approx(0.8, abs=1e-15)
        assert rep.f1 == pytest.approx(0.8470588235294118, abs=1e-12)

    def test_zero_everything(self):
        rep = score(match_image([], []), [], [])
        assert (rep.tp, rep.fp, rep.fn) == (0, 0, 0)
        assert not rep.precision_defined and not rep.recall_defined
        assert rep.precision == 0.0 and rep.recall == 0.0 and rep.f1 == 0.0


class TestAggregate:
    def test_micro_sum(self):
        r1 = MetricsReport(tp=1, fp=1, fn=0, per_class={1: ClassMetrics(1, 1, 0)},
                           confusions={})
        r2 = MetricsReport(tp=1, fp=0, fn=1, per_class={1: ClassMetrics(1, 0, 1)},
                           confusions={(18, 19): 2})
        total = aggregate([r1, r2])
        assert (total.tp, total.fp, total.fn) == (2, 1, 1)
        assert total.f1 == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert total.per_class[1].tp == 2
        assert total.confusions == {(18, 19): 2}

    def test_micro_differs_from_macro(self):
        # micro-averaging weighs images by their counts
        r1 = MetricsReport(tp=9, fp=1, fn=0, per_class={}, confusions={})
        r2 = MetricsReport(tp=0, fp=0, fn=1, per_class={}, confusions={})
        total = aggregate([r1, r2])
        assert total.precision == 0.9
        assert total.recall == 0.9


class TestEndToEnd:
    def test_evaluate_images(self, tmp_path):
        gts = group_by_image([gt(0, 0, 50, 3, "a"), gt(200, 0, 40, 5, "a"),
                              gt(0, 0, 30, 7, "b")])
        preds = group_by_image([
            ("a", det(0, 0, 50, 3, 0.9)),       # correct
            ("a", det(500, 500, 40, 5, 0.8)),   # FP (no overlap)
            ("b", det(0, 0, 30, 6, 0.7)),       # wrong class
        ])
        overall, per_image = evaluate_images(preds, gts)
        assert (overall.tp, overall.fp, overall.fn) == (1, 2, 2)
        assert overall.confusions == {(7, 6): 1}
        assert set(per_image) == {"a", "b"}

    def test_report_text(self):
        gts = [gt(0, 0, 50, 3)]
        preds = [det(0, 0, 50, 3, 0.9), det(200, 200, 50, 4, 0.8)]
        rep = score(match_image(preds, gts), preds, gts)
        text = format_report(rep)
        assert "overall: tp=1 fp=1 fn=0" in text
        assert "precision=0.500000 recall=1.000000" in text
        assert f"({CLASS_NAMES[3]})" in text

    def test_report_notes_undefined(self):
        rep = score(match_image([], []), [], [])
        text = format_report(rep)
        assert "precision undefined" in text
        assert "recall undefined" in text

    def test_class_metrics_csv(self, tmp_path):
        gts = [gt(0, 0, 50, 3)]
        preds = [det(0, 0, 50, 3, 0.9)]
        rep = score(match_image(preds, gts), preds, gts)
        out = tmp_path / "metrics.csv"
        write_class_metrics_csv(out, rep)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "class,tp,fp,fn,precision,recall,f1"
        assert lines[1].startswith("3,1,0,0,")
        assert lines[-1].startswith("overall,1,0,0,")

    def test_greedy_prefers_high_score_on_shared_gt(self):
        # both preds clear the gate on the same gt; high score takes it
        g = gt(0, 0, 100, 1)
        close = Detection(BBox(0, 0, 100, 99), 1, 0.6)
        exact = det(0, 0, 100, 1, 0.9)
        rep = score(match_image([close, exact], [g]), [close, exact], [g])
        assert (rep.tp, rep.fp, rep.fn) == (1, 1, 0)

    def test_matching_is_stable_under_pred_order(self):
        rng = np.random.default_rng(11)
        gts = [gt(i * 100, 0, 50, 1 + i % 5) for i in range(4)]
        preds = [det(i * 100, 0, 50, 1 + i % 5, 0.5 + 0.1 * i) for i in range(4)]
        base = score(match_image(preds, gts), preds, gts)
        for _ in range(10):
            perm = rng.permutation(len(preds))
            shuffled = [preds[i] for i in perm]
            rep = score(match_image(shuffled, gts), shuffled, gts)
            assert (rep.tp, rep.fp, rep.fn) == (base.tp, base.fp, base.fn)

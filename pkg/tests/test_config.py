"""Flat key=value run configuration."""

import pytest

from tsdkit.config import RunConfig, load_config
from tsdkit.errors import InvalidConfig, ParseError


class TestDefaults:
    def test_core_values(self):
        cfg = RunConfig()
        assert cfg.tile_size == 400 and cfg.tile_overlap == 100
        assert cfg.iou_gate == 0.9 and cfg.nms_iou == 0.5
        assert cfg.anchor_strides == (8, 16, 32, 64, 128)
        assert cfg.anchor_scales == (0.1, 0.2, 0.5, 0.8, 1.0, 1.5)
        assert len(cfg.sign_colors) == 20

    def test_defaults_valid(self):
        assert RunConfig().validate() is not None

    def test_derived_objects(self):
        cfg = RunConfig()
        assert cfg.anchor_config().anchors_per_location == 18
        assert cfg.focal_params().gamma == 2.0
        assert cfg.palette().sign_colors[18] != cfg.palette().sign_colors[19]

    def test_items_expand_palette(self):
        keys = [k for k, _ in RunConfig().items()]
        assert "sign_color_1" in keys and "sign_color_20" in keys
        assert "sign_colors" not in keys
        assert len(keys) == len(set(keys))


class TestLoad:
    def test_empty_file_is_defaults(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# nothing but comments\n\n")
        assert load_config(p) == RunConfig()

    def test_round_trip(self, tmp_path):
        cfg = RunConfig()
        p = tmp_path / "run.cfg"
        p.write_text(cfg.to_text())
        assert load_config(p) == cfg

    def test_override_scalar(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tile_size = 256\ntile_overlap = 64\n")
        cfg = load_config(p)
        assert cfg.tile_size == 256 and cfg.tile_overlap == 64
        assert cfg.nms_iou == 0.5  # untouched default

    def test_override_list_and_color(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("anchor_ratios = 1.0,2.0\nsign_color_3 = 1,2,3\n")
        cfg = load_config(p)
        assert cfg.anchor_ratios == (1.0, 2.0)
        assert cfg.sign_colors[2] == (1, 2, 3)

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("definitely_not_a_key = 1\n")
        with pytest.raises(ParseError, match="line 1"):
            load_config(p)

    def test_duplicate_key(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tile_size = 256\ntile_size = 128\n")
        with pytest.raises(ParseError, match="line 2"):
            load_config(p)

    def test_bad_value_type(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tile_size = large\n")
        with pytest.raises(ParseError, match="line 1"):
            load_config(p)

    def test_bad_color_range(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("sky_color = 300,0,0\n")
        with pytest.raises(ParseError):
            load_config(p)

    def test_missing_equals(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tile_size 256\n")
        with pytest.raises(ParseError, match="line 1"):
            load_config(p)

    def test_out_of_range_combination(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("tile_overlap = 500\n")
        with pytest.raises(InvalidConfig):
            load_config(p)

    def test_missing_file_is_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_config(tmp_path / "absent.cfg")


class TestValidate:
    def test_gate_range(self):
        with pytest.raises(InvalidConfig):
            RunConfig(iou_gate=1.5).validate()

    def test_threshold_ordering(self):
        with pytest.raises(InvalidConfig):
            RunConfig(assign_pos_iou=0.3, assign_neg_iou=0.4).validate()

    def test_sign_sizes(self):
        with pytest.raises(InvalidConfig):
            RunConfig(sign_min_size=90, sign_max_size=80).validate()

    def test_describe_single_line(self):
        text = RunConfig().describe()
        assert "\n" not in text
        assert "tile_size=400" in text

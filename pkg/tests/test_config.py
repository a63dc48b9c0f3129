import pytest

from stereocolor.config import DEFAULTS, distortion_ranges, load_config, parse_config_text, parse_value


def test_parse_value_types():
    assert parse_value("20") == 20
    assert parse_value("0.125") == 0.125
    assert parse_value("true") is True
    assert parse_value("off") is False
    assert parse_value("pitie-mk") == "pitie-mk"


def test_parse_config_text():
    text = "# comment\nidt.iterations = 10\n\nsplit.train=0.6\n"
    values = parse_config_text(text)
    assert values == {"idt.iterations": 10, "split.train": 0.6}


def test_parse_rejects_bare_lines():
    with pytest.raises(ValueError):
        parse_config_text("justakey\n")


def test_load_config_layers(tmp_path):
    path = tmp_path / "conf.txt"
    path.write_text("idt.bins = 128\n")
    merged = load_config(path, {"idt.seed": 7, "ignored": None})
    assert merged["idt.bins"] == 128
    assert merged["idt.seed"] == 7
    assert merged["idt.iterations"] == DEFAULTS["idt.iterations"]
    assert "ignored" not in merged


def test_distortion_ranges_cover_all_ops():
    ranges = distortion_ranges(DEFAULTS)
    for key in ("brightness_min", "contrast_max", "gamma_min", "hue_max", "sat_min", "val_max"):
        assert key in ranges

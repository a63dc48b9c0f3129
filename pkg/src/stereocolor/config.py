"""Flat key-value configuration shared by the CLI and the harness.

Files hold one `key = value` pair per line, keys namespaced per module
(`idt.iterations = 20`). CLI flags override file values, which override the
defaults below.
"""

from __future__ import annotations

DEFAULTS = {
    # Iterative distribution transfer.
    "idt.iterations": 20,
    "idt.bins": 300,
    "idt.seed": 0,
    "idt.regrain": True,
    "idt.regrain_strength": 1.0,
    # Synthetic distortion parameter ranges.
    "distort.brightness_min": -0.3,
    "distort.brightness_max": 0.3,
    "distort.contrast_min": -0.3,
    "distort.contrast_max": 0.3,
    "distort.gamma_min": 0.7,
    "distort.gamma_max": 1.4,
    "distort.hue_min": -20.0,
    "distort.hue_max": 20.0,
    "distort.sat_min": 0.7,
    "distort.sat_max": 1.3,
    "distort.val_min": 0.7,
    "distort.val_max": 1.3,
    # Dataset splitting.
    "split.train": 0.75,
    "split.val": 0.125,
    "split.test": 0.125,
    "split.seed": 0,
    # Benchmark timing probe.
    "bench.repeats": 3,
    "bench.warmup": False,
    "bench.probe_size": 512,
}


def parse_value(text: str):
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = parse_value(value)
    return values


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, overlaid with an optional file, overlaid with overrides."""
    merged = dict(DEFAULTS)
    if path is not None:
        with open(path) as fh:
            merged.update(parse_config_text(fh.read()))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def distortion_ranges(config: dict) -> dict:
    prefix = "distort."
    return {k[len(prefix):]: v for k, v in config.items() if k.startswith(prefix)}

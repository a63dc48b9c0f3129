"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line so the whole gate can be read off `pytest -s` output."""

import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.stats import wasserstein_distance

from stereocolor.distortion import apply_gamma
from stereocolor.global_transfer import (
    Decomposition,
    pitie_linear_transfer,
    reinhard_transfer,
    xiao_transfer,
)
from stereocolor.harness import load_dataset, make_timing_probe, run_benchmark, split_dataset
from stereocolor.idt import IdtConfig, idt_transfer, random_rotation
from stereocolor.imaging import compute_stats, rgb_to_lab
from stereocolor.io_png import load_image, save_image
from stereocolor.metrics import psnr, ssim, time_method
from stereocolor.config import load_config

from conftest import smooth_image, stereo_like_pair
from oracles import ssim_per_window


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f"  ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


GLOBAL_METHODS = [
    ("reinhard", reinhard_transfer),
    ("xiao", xiao_transfer),
    ("pitie-cholesky", lambda t, r: pitie_linear_transfer(t, r, Decomposition.CHOLESKY)),
    ("pitie-sqrt", lambda t, r: pitie_linear_transfer(t, r, Decomposition.SQRT)),
    ("pitie-mk", lambda t, r: pitie_linear_transfer(t, r, Decomposition.MONGE_KANTOROVITCH)),
]


def test_moment_matching_on_random_pairs():
    """Every global method matches the reference statistics on 20 pairs."""
    start = time.perf_counter()
    worst = {"lab_mean": 0.0, "lab_std": 0.0, "rgb_mean": 0.0, "rgb_cov": 0.0}
    for seed in range(20):
        target, reference = stereo_like_pair(1000 + seed)
        out = reinhard_transfer(target, reference, clamp=False)
        got = compute_stats(rgb_to_lab(out))
        want = compute_stats(rgb_to_lab(reference))
        worst["lab_mean"] = max(worst["lab_mean"], np.abs(got.mean - want.mean).max())
        worst["lab_std"] = max(worst["lab_std"], np.abs(got.std - want.std).max())
        rgb_outputs = [
            xiao_transfer(target, reference, clamp=False),
            pitie_linear_transfer(target, reference, Decomposition.CHOLESKY, clamp=False),
            pitie_linear_transfer(target, reference, Decomposition.SQRT, clamp=False),
            pitie_linear_transfer(
                target, reference, Decomposition.MONGE_KANTOROVITCH, clamp=False
            ),
        ]
        for out in rgb_outputs:
            got = compute_stats(out)
            want = compute_stats(reference)
            worst["rgb_mean"] = max(worst["rgb_mean"], np.abs(got.mean - want.mean).max())
            rel = np.linalg.norm(got.cov - want.cov) / np.linalg.norm(want.cov)
            worst["rgb_cov"] = max(worst["rgb_cov"], rel)
    elapsed = time.perf_counter() - start
    ok = (
        worst["lab_mean"] < 1e-3
        and worst["lab_std"] < 1e-3
        and worst["rgb_mean"] < 1e-3
        and worst["rgb_cov"] < 1e-2
        and elapsed < 10.0
    )
    report(
        "moment matching (20 random 64x64 pairs)",
        ok,
        f"lab mean {worst['lab_mean']:.2e}, lab std {worst['lab_std']:.2e}, "
        f"rgb mean {worst['rgb_mean']:.2e}, cov rel {worst['rgb_cov']:.2e}, {elapsed:.1f}s",
    )


def test_affine_recovery():
    """Per-channel gain+offset distortion is inverted by the MK map."""
    start = time.perf_counter()
    gt = smooth_image(77, 64, 64, lo=0.1, hi=0.8)
    gains = np.array([0.8, 0.9, 1.1])
    distorted = gt * gains + 0.05
    # independent oracle: the analytic inverse restores the image exactly
    analytic = (distorted - 0.05) / gains
    assert psnr(analytic, gt) > 100.0
    recovered = pitie_linear_transfer(distorted, gt, Decomposition.MONGE_KANTOROVITCH)
    score = psnr(recovered, gt)
    elapsed = time.perf_counter() - start
    report(
        "affine recovery via pitie-mk",
        score >= 40.0 and elapsed < 5.0,
        f"PSNR {score:.1f} dB, {elapsed:.2f}s",
    )


def test_idempotence_on_matched_pairs():
    """method(x, x) == x for every registered correction method."""
    img = smooth_image(78, 64, 64)
    worst_global = 0.0
    for name, method in GLOBAL_METHODS:
        err = np.abs(method(img, img) - img).max()
        worst_global = max(worst_global, err)
    idt_out = idt_transfer(img, img, IdtConfig(iterations=20, regrain=False, seed=1))
    idt_err = np.abs(idt_out - img).max()
    report(
        "idempotence on matched pairs",
        worst_global < 1e-3 and idt_err <= 0.02,
        f"global max err {worst_global:.2e}, idt max err {idt_err:.3f}",
    )


def test_idt_marginal_convergence():
    """Projected marginals converge to the reference and never regress."""
    probe_axes = [random_rotation(555, k)[0] for k in range(20)]

    def w1(pixels_a, pixels_b):
        return float(
            np.mean([wasserstein_distance(pixels_a @ ax, pixels_b @ ax) for ax in probe_axes])
        )

    fixtures = []
    base = smooth_image(80, 48, 48, lo=0.15, hi=0.8)
    fixtures.append((np.clip(base + 0.1, 0, 1), base))
    fixtures.append((apply_gamma(base, 1.3), base))
    fixtures.append((smooth_image(81, 48, 48, lo=0.1, hi=0.5), smooth_image(82, 48, 48, lo=0.4, hi=0.9)))

    finals, monotone = [], True
    for idx, (target, reference) in enumerate(fixtures):
        ref_px = reference.reshape(-1, 3)
        history = [w1(target.reshape(-1, 3), ref_px)]
        idt_transfer(
            target,
            reference,
            IdtConfig(iterations=20, regrain=False, seed=idx),
            on_iteration=lambda i, px: history.append(w1(px, ref_px)),
        )
        finals.append(history[-1])
        monotone &= all(b <= a + 1e-3 for a, b in zip(history, history[1:]))
    report(
        "idt marginal convergence (3 fixture pairs)",
        max(finals) <= 0.02 and monotone,
        f"final W1 {max(finals):.4f}, non-increasing: {monotone}",
    )


def test_ssim_oracle_equivalence():
    """Separable SSIM equals the brute-force per-window computation."""
    rng = np.random.default_rng(5)
    a = smooth_image(83, 64, 64)
    b = np.clip(a + rng.normal(0, 0.05, a.shape), 0, 1)
    diff = abs(ssim(a, b) - ssim_per_window(a, b))
    self_sim = abs(ssim(a, a) - 1.0)
    report(
        "ssim separable == brute force",
        diff < 1e-6 and self_sim < 1e-9,
        f"diff {diff:.2e}, |ssim(a,a)-1| {self_sim:.2e}",
    )


def test_psnr_closed_form():
    """All-zeros vs all-0.1 is exactly 20 dB."""
    value = psnr(np.zeros((64, 64, 3)), np.full((64, 64, 3), 0.1))
    report("psnr closed form 20 dB", value == 20.0, f"got {value!r}")


def test_timing_protocol():
    """Min-of-3 on a 512x512 probe; the iterative method is >= 3x slower
    than the covariance-fitting one."""
    probe = make_timing_probe(512)
    mk = lambda l, r: pitie_linear_transfer(l, r, Decomposition.MONGE_KANTOROVITCH)
    idt = lambda l, r: idt_transfer(l, r, IdtConfig())
    mk_ms = time_method(mk, probe, repeats=3)
    idt_ms = time_method(idt, probe, repeats=3)
    ratio = idt_ms / mk_ms
    report(
        "timing protocol (512x512, min of 3)",
        mk_ms > 0 and ratio >= 3.0,
        f"pitie-mk {mk_ms:.0f} ms, pitie-idt {idt_ms:.0f} ms, ratio {ratio:.1f}x",
    )


def test_distortion_determinism(tmp_path):
    """Two `distort` runs with one seed produce byte-identical trees."""
    from test_harness import write_pair_scene

    src = tmp_path / "pairs"
    write_pair_scene(src, "sceneA", 2)
    write_pair_scene(src, "sceneB", 2, seed_base=9)
    outputs = []
    for run_dir in ("run1", "run2"):
        out = tmp_path / run_dir
        code = subprocess.run(
            [sys.executable, "-m", "stereocolor.cli", "distort",
             "--in", str(src), "--out", str(out), "--seed", "42"],
            capture_output=True,
        ).returncode
        assert code == 0
        outputs.append(
            {p.relative_to(out): p.read_bytes() for p in out.rglob("*") if p.is_file()}
        )
    identical = outputs[0] == outputs[1]
    report(
        "distort determinism (fixed seed, two runs)",
        identical,
        f"{len(outputs[0])} files compared",
    )


def test_end_to_end_benchmark(tmp_path):
    """Gamma-1.2 triplet fixture: some global method clears 30 dB mean PSNR."""
    data = tmp_path / "data"
    for s in range(3):
        scene_dir = data / f"scene{s:02d}"
        scene_dir.mkdir(parents=True)
        for f in range(2):
            gt = smooth_image(900 + 10 * s + f, 64, 64, lo=0.3, hi=0.8)
            save_image(scene_dir / f"{f:04d}_left.png", apply_gamma(gt, 1.2))
            save_image(scene_dir / f"{f:04d}_left_gt.png", gt)
            save_image(scene_dir / f"{f:04d}_right.png", np.roll(gt, 3, axis=1))
    manifest = split_dataset(load_dataset(data), (0.0, 0.0, 1.0), seed=0)
    config = load_config()
    config["bench.probe_size"] = 64
    config["bench.repeats"] = 1
    report_obj = run_benchmark(manifest, ["reinhard", "xiao", "pitie-mk"], config)
    best = max(row.psnr_mean for row in report_obj.rows)
    report(
        "end-to-end benchmark (gamma 1.2 fixture)",
        best > 30.0,
        f"best mean PSNR {best:.1f} dB over {report_obj.rows[0].frames_evaluated} frames",
    )

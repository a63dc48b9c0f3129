import numpy as np
import pytest
import torch


def smooth_tensor(seed, height=64, width=64, lo=0.25, hi=0.75):
    """Piecewise-smooth test image as a float32 (3, H, W) tensor."""
    rng = np.random.default_rng(seed)
    base = rng.random((height // 8 + 2, width // 8 + 2, 3))
    up = np.kron(base, np.ones((8, 8, 1)))[:height, :width, :]
    for _ in range(2):
        up = 0.25 * (
            np.roll(up, 1, 0) + np.roll(up, -1, 0) + np.roll(up, 1, 1) + np.roll(up, -1, 1)
        )
    arr = (lo + (hi - lo) * up).astype(np.float32)
    return torch.from_numpy(arr).permute(2, 0, 1).contiguous()


def psnr_t(a, b):
    mse = float(((a - b) ** 2).mean())
    return float("inf") if mse == 0 else -10.0 * np.log10(mse)


def write_triplet_scene(root, scene, n_frames, seed_base=0, size=64, gamma=1.25):
    """Write a synthetic triplet scene in the benchmark harness's layout."""
    from stereocolornet.data import save_image

    scene_dir = root / scene
    scene_dir.mkdir(parents=True, exist_ok=True)
    for f in range(n_frames):
        gt = smooth_tensor(seed_base + f, size, size)
        left = gt.clamp(1e-4, 1) ** gamma
        right = torch.roll(gt, 4, dims=2)
        save_image(scene_dir / f"{f:04d}_left.png", left)
        save_image(scene_dir / f"{f:04d}_left_gt.png", gt)
        save_image(scene_dir / f"{f:04d}_right.png", right)
    return scene_dir


@pytest.fixture(autouse=True)
def _seed_torch():
    torch.manual_seed(0)

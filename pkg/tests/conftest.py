import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


def smooth_image(seed, height=64, width=64, lo=0.2, hi=0.8):
    """Piecewise-smooth pseudo-natural image with values in [lo, hi]."""
    rng = np.random.default_rng(seed)
    cell = 8
    base = rng.random((height // cell + 2, width // cell + 2, 3))
    up = np.kron(base, np.ones((cell, cell, 1)))[:height, :width, :]
    # light blur to soften block edges
    blurred = up.copy()
    for _ in range(2):
        blurred = 0.25 * (
            np.roll(blurred, 1, axis=0)
            + np.roll(blurred, -1, axis=0)
            + np.roll(blurred, 1, axis=1)
            + np.roll(blurred, -1, axis=1)
        )
    return lo + (hi - lo) * blurred


def stereo_like_pair(seed, height=64, width=64, lo=0.25, hi=0.75):
    """Reference plus a parallax-shifted, mildly recolored target."""
    reference = smooth_image(seed, height, width, lo, hi)
    shifted = np.roll(reference, 4, axis=1)
    target = np.clip(shifted * 0.95 + 0.02, 0.0, 1.0)
    return target, reference


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES

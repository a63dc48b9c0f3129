import pytest
import torch

from stereocolornet.attention import (
    ATTENTION_SCALES,
    AttentionMaps,
    cycle_attention,
    lower_triangular_softmax,
    upper_triangular_softmax,
    valid_mask_from_cycle,
    warp_with_attention,
)
from stereocolornet.losses import (
    LossBundle,
    compute_losses,
    cycle_loss,
    l1_loss,
    l2_loss,
    photometric_loss,
    smoothness_loss,
    ssim_index,
    ssim_loss,
)

from conftest import smooth_tensor


def make_attention(size=16, dtype=torch.float64, seed=0, requires_grad=False):
    """AttentionMaps built from raw logits through the real softmax path."""
    gen = torch.Generator().manual_seed(seed)
    maps = AttentionMaps()
    logits = {}
    for scale in ATTENTION_SCALES:
        n = size // scale
        r2l_logits = torch.randn(1, n, n, n, generator=gen, dtype=dtype)
        l2r_logits = torch.randn(1, n, n, n, generator=gen, dtype=dtype)
        r2l_logits.requires_grad_(requires_grad)
        l2r_logits.requires_grad_(requires_grad)
        logits[scale] = (r2l_logits, l2r_logits)
        maps.left_images[scale] = torch.rand(1, 3, n, n, generator=gen, dtype=dtype)
        maps.right_images[scale] = torch.rand(1, 3, n, n, generator=gen, dtype=dtype)
    _fill_from_logits(maps, logits)
    return maps, logits


def _fill_from_logits(maps, logits):
    for scale, (r2l_logits, l2r_logits) in logits.items():
        a_r2l = lower_triangular_softmax(r2l_logits)
        a_l2r = upper_triangular_softmax(l2r_logits)
        maps.r2l[scale] = a_r2l
        maps.l2r[scale] = a_l2r
        maps.valid[scale] = valid_mask_from_cycle(cycle_attention(a_r2l, a_l2r))
        maps.warped[scale] = warp_with_attention(a_r2l, maps.right_images[scale])


class TestClosedForms:
    def test_zero_when_matched(self):
        img = smooth_tensor(1, 32, 32).double()[None]
        assert float(l1_loss(img, img)) == 0.0
        assert float(l2_loss(img, img)) == 0.0
        assert abs(float(ssim_loss(img, img))) < 1e-6

    def test_constant_difference(self):
        a = torch.zeros(1, 3, 16, 16, dtype=torch.float64)
        b = torch.full((1, 3, 16, 16), 0.1, dtype=torch.float64)
        assert abs(float(l1_loss(a, b)) - 0.1) < 1e-12
        assert abs(float(l2_loss(a, b)) - 0.01) < 1e-12

    def test_ssim_index_bounds(self):
        a = smooth_tensor(2, 32, 32)[None]
        noisy = (a + 0.2 * torch.randn_like(a)).clamp(0, 1)
        value = float(ssim_index(a, noisy))
        assert -1.0 <= value < 1.0

    def test_all_terms_non_negative_and_total_weighted(self):
        maps, _ = make_attention(16)
        corrected = torch.rand(1, 3, 16, 16, dtype=torch.float64)
        gt = torch.rand(1, 3, 16, 16, dtype=torch.float64)
        bundle = compute_losses(corrected, gt, maps, weights=(1, 2, 3, 4, 5, 6))
        terms = [float(t) for t in bundle.terms()]
        assert all(t >= 0 for t in terms)
        expected = sum(w * t for w, t in zip((1, 2, 3, 4, 5, 6), terms))
        assert abs(float(bundle.total) - expected) < 1e-9


def directional_gradient_check(f, leaves, rel=1e-3, eps=1e-5, seed=0):
    gen = torch.Generator().manual_seed(seed)
    directions = [torch.randn(leaf.shape, generator=gen, dtype=leaf.dtype) for leaf in leaves]
    norm = torch.sqrt(sum((d**2).sum() for d in directions))
    directions = [d / norm for d in directions]

    value = f(leaves)
    grads = torch.autograd.grad(value, leaves, allow_unused=True)
    analytic = sum(
        float((g * d).sum()) for g, d in zip(grads, directions) if g is not None
    )
    plus = float(f([(l + eps * d).detach() for l, d in zip(leaves, directions)]))
    minus = float(f([(l - eps * d).detach() for l, d in zip(leaves, directions)]))
    fd = (plus - minus) / (2 * eps)
    assert abs(analytic - fd) <= rel * max(abs(fd), 1e-8), (analytic, fd)


class TestGradients:
    """Every loss term against central finite differences on a 16x16 crop."""

    def setup_method(self, method):
        torch.manual_seed(0)
        self.gt = torch.rand(1, 3, 16, 16, dtype=torch.float64)

    def corrected_leaf(self):
        return (0.3 + 0.4 * torch.rand(1, 3, 16, 16, dtype=torch.float64)).requires_grad_()

    @pytest.mark.parametrize("term", [l1_loss, l2_loss, ssim_loss])
    def test_supervised_terms(self, term):
        leaf = self.corrected_leaf()
        directional_gradient_check(lambda leaves: term(leaves[0], self.gt), [leaf])

    @pytest.mark.parametrize(
        "term", [photometric_loss, smoothness_loss, cycle_loss], ids=lambda f: f.__name__
    )
    def test_attention_terms(self, term):
        maps, logits = make_attention(16, requires_grad=True)
        leaves = [t for pair in logits.values() for t in pair]

        def f(current_leaves):
            rebuilt = AttentionMaps(
                left_images=maps.left_images, right_images=maps.right_images
            )
            packed = {
                scale: (current_leaves[2 * i], current_leaves[2 * i + 1])
                for i, scale in enumerate(logits)
            }
            _fill_from_logits(rebuilt, packed)
            return term(rebuilt)

        directional_gradient_check(f, leaves)

    def test_total_wrt_corrected(self):
        maps, _ = make_attention(16)
        leaf = self.corrected_leaf()

        def f(leaves):
            return compute_losses(leaves[0], self.gt, maps).total

        directional_gradient_check(f, [leaf])


class TestLossBundle:
    def test_default_weights(self):
        maps, _ = make_attention(16)
        corrected = torch.rand(1, 3, 16, 16, dtype=torch.float64)
        bundle = compute_losses(corrected, corrected, maps)
        assert bundle.weights == (1.0, 1.0, 1.0, 0.1, 0.1, 0.1)
        assert isinstance(bundle, LossBundle)

"""
Tests des noyaux numériques : tailles, oracles naïfs, activations, perte
"""

import numpy as np
import pytest

from models.op_types import ConvSpec
from utils.exceptions import DataError, ShapeError, SizingError
from utils.nn_ops import (
    conv2d_backward, conv2d_forward, conv_output_size, crop_center, crop_center_backward,
    deconv2d_backward, deconv2d_forward, deconv_output_size, dropout, dropout_backward,
    pool_output_size, relu, relu_backward, softmax_cross_entropy
)
from utils.reference_ops import conv2d_naive, deconv2d_naive
from utils.tensor_core import Rng


def _random_config(rng: Rng):
    """Configuration aléatoire de petite taille : (n, c, h, w, out_c, k, s, p)"""
    n = 1 + int(rng.integers(2, 1)[0])
    c = 1 + int(rng.integers(3, 1)[0])
    out_c = 1 + int(rng.integers(3, 1)[0])
    k = 1 + int(rng.integers(4, 1)[0])
    s = 1 + int(rng.integers(2, 1)[0])
    p = int(rng.integers(min(k, 2), 1)[0])
    h = k + int(rng.integers(4, 1)[0])
    w = k + int(rng.integers(4, 1)[0])
    return n, c, h, w, out_c, k, s, p


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max() / max(np.abs(b).max(), 1e-12))


class TestSizeRules:
    """Règles de taille des sorties"""

    def test_conv1_of_the_table(self):
        assert conv_output_size(480, 7, 2, 0) == 237
        assert conv_output_size(360, 7, 2, 0) == 177

    def test_ceil_mode_pool(self):
        assert pool_output_size(237, 3, 2) == 118
        assert pool_output_size(177, 3, 2) == 88
        assert pool_output_size(59, 3, 2) == 29
        assert pool_output_size(44, 3, 2) == 22

    def test_deconv_restores_input(self):
        assert deconv_output_size(237, 10, 2, 1) == 480
        assert deconv_output_size(177, 10, 2, 1) == 360


class TestConvolution:
    """Convolution et déconvolution face aux oracles naïfs"""

    @pytest.mark.parametrize("index", range(25))
    def test_conv_matches_oracle(self, index):
        rng = Rng(100).derive(index)
        n, c, h, w, out_c, k, s, p = _random_config(rng)
        spec = ConvSpec(out_c, (k, k), s, p)
        x = rng.normal(n * c * h * w).reshape(n, c, h, w)
        weight = rng.normal(out_c * c * k * k).reshape(out_c, c, k, k)
        bias = rng.normal(out_c)

        expected = conv2d_naive(x, weight, bias, spec)
        assert _relative(conv2d_forward(x, weight, bias, spec), expected) <= 1e-6
        got32 = conv2d_forward(x.astype(np.float32), weight.astype(np.float32), bias.astype(np.float32), spec)
        assert got32.dtype == np.float32
        assert _relative(got32, expected) <= 1e-5

    @pytest.mark.parametrize("index", range(25))
    def test_deconv_matches_oracle(self, index):
        rng = Rng(200).derive(index)
        n, c, h, w, out_c, k, s, p = _random_config(rng)
        spec = ConvSpec(out_c, (k, k), s, p)
        x = rng.normal(n * c * h * w).reshape(n, c, h, w)
        weight = rng.normal(c * out_c * k * k).reshape(c, out_c, k, k)
        bias = rng.normal(out_c)

        expected = deconv2d_naive(x, weight, bias, spec)
        assert _relative(deconv2d_forward(x, weight, bias, spec), expected) <= 1e-6
        got32 = deconv2d_forward(x.astype(np.float32), weight.astype(np.float32), bias.astype(np.float32), spec)
        assert _relative(got32, expected) <= 1e-5

    def test_deconv_is_adjoint_of_conv(self, random_tensor):
        """<conv(x), y> == <x, deconv(y)> sans biais, mêmes poids"""
        spec = ConvSpec(3, (3, 3), 2, 1)
        x = random_tensor((1, 2, 7, 7), seed=1)
        weight = random_tensor((3, 2, 3, 3), seed=2)
        y = conv2d_forward(x, weight, np.zeros(3), spec)
        z = random_tensor(y.shape, seed=3)
        back = deconv2d_forward(z, weight, np.zeros(2), ConvSpec(2, (3, 3), 2, 1))
        assert back.shape == x.shape
        assert np.isclose((y * z).sum(), (x * back).sum())

    def test_conv_backward_bias_is_sum(self, random_tensor):
        spec = ConvSpec(2, (3, 3), 1, 1)
        x = random_tensor((2, 1, 5, 5))
        weight = random_tensor((2, 1, 3, 3), seed=1)
        grad_y = random_tensor((2, 2, 5, 5), seed=2)
        grad_x, grad_w, grad_b = conv2d_backward(x, weight, spec, grad_y)
        assert grad_x.shape == x.shape
        assert grad_w.shape == weight.shape
        assert np.allclose(grad_b, grad_y.sum(axis=(0, 2, 3)))

    def test_deconv_backward_shapes(self, random_tensor):
        spec = ConvSpec(3, (4, 4), 2, 1)
        x = random_tensor((1, 2, 3, 4))
        weight = random_tensor((2, 3, 4, 4), seed=1)
        y = deconv2d_forward(x, weight, np.zeros(3), spec)
        grad_x, grad_w, grad_b = deconv2d_backward(x, weight, spec, np.ones_like(y))
        assert (grad_x.shape, grad_w.shape, grad_b.shape) == (x.shape, weight.shape, (3,))

    def test_conv_channel_mismatch(self, random_tensor):
        with pytest.raises(ShapeError):
            conv2d_forward(random_tensor((1, 2, 5, 5)), random_tensor((1, 3, 3, 3)), np.zeros(1),
                           ConvSpec(1, (3, 3)))

    def test_conv_degenerate_output(self, random_tensor):
        with pytest.raises(SizingError):
            conv2d_forward(random_tensor((1, 1, 2, 2)), random_tensor((1, 1, 3, 3)), np.zeros(1),
                           ConvSpec(1, (3, 3)))

    def test_invalid_spec(self):
        with pytest.raises(ShapeError):
            ConvSpec(1, (3, 3), stride=0)


class TestActivations:
    """ReLU, recadrage et dropout"""

    def test_relu_and_zero_subgradient(self):
        x = np.array([-1.0, 0.0, 2.0]).reshape(1, 1, 1, 3)
        assert np.array_equal(relu(x).ravel(), [0.0, 0.0, 2.0])
        assert np.array_equal(relu_backward(x, np.ones_like(x)).ravel(), [0.0, 0.0, 1.0])

    def test_crop_center(self, random_tensor):
        x = random_tensor((1, 2, 6, 7))
        y = crop_center(x, 1)
        assert y.shape == (1, 2, 4, 5)
        assert np.array_equal(y, x[:, :, 1:5, 1:6])
        back = crop_center_backward(np.ones_like(y), 1)
        assert back.shape == x.shape
        assert back.sum() == y.size
        assert back[:, :, 0].sum() == 0

    def test_crop_too_small(self, random_tensor):
        with pytest.raises(SizingError):
            crop_center(random_tensor((1, 1, 2, 5)), 1)

    def test_dropout_eval_is_identity(self, random_tensor):
        x = random_tensor((1, 4, 3, 3))
        y, mask = dropout(x, 0.5, None, training=False)
        assert y is x
        assert mask is None

    def test_dropout_training_scales_survivors(self):
        x = np.ones((1, 8, 16, 16))
        y, mask = dropout(x, 0.5, Rng(3), training=True)
        assert set(np.unique(y).tolist()) <= {0.0, 2.0}
        assert 0.4 < (y > 0).mean() < 0.6
        assert np.array_equal(dropout_backward(mask, np.ones_like(x)), mask)

    def test_dropout_same_rng_same_mask(self):
        x = np.ones((1, 2, 5, 5))
        _, a = dropout(x, 0.3, Rng(9), training=True)
        _, b = dropout(x, 0.3, Rng(9), training=True)
        assert np.array_equal(a, b)

    def test_dropout_rejects_p_one(self):
        with pytest.raises(ShapeError):
            dropout(np.ones((1, 1, 1, 1)), 1.0, Rng(0), training=True)


class TestLoss:
    """Entropie croisée pondérée avec identifiant ignoré"""

    def test_uniform_logits(self):
        logits = np.zeros((1, 2, 2, 2))
        labels = np.array([[[0, 1], [1, 0]]])
        out = softmax_cross_entropy(logits, labels, np.ones(2))
        assert np.isclose(out.loss, np.log(2))
        assert out.counted_pixels == 4
        # pixel (0, 0) de classe 0 : (0.5 - 1) / 4 sur le canal 0, 0.5 / 4 sur le canal 1
        assert np.isclose(out.grad_logits[0, 0, 0, 0], -0.125)
        assert np.isclose(out.grad_logits[0, 1, 0, 0], 0.125)

    def test_gradient_sums_to_zero_over_classes(self, random_tensor):
        logits = random_tensor((2, 4, 3, 3))
        labels = Rng(1).integers(4, 18).reshape(2, 3, 3)
        out = softmax_cross_entropy(logits, labels, np.array([1.0, 2.0, 0.5, 1.0]))
        assert np.allclose(out.grad_logits.sum(axis=1), 0.0)

    def test_uniform_weight_scaling_is_neutral(self, random_tensor):
        logits = random_tensor((1, 3, 4, 4))
        labels = Rng(2).integers(3, 16).reshape(1, 4, 4)
        a = softmax_cross_entropy(logits, labels, np.ones(3))
        b = softmax_cross_entropy(logits, labels, 5 * np.ones(3))
        assert np.isclose(a.loss, b.loss)
        assert np.allclose(a.grad_logits, b.grad_logits)

    def test_ignored_pixels(self, random_tensor):
        logits = random_tensor((1, 3, 2, 2))
        labels = np.array([[[255, 1], [2, 255]]])
        out = softmax_cross_entropy(logits, labels, np.ones(3))
        assert out.counted_pixels == 2
        assert np.all(out.grad_logits[0, :, 0, 0] == 0)
        assert np.all(out.grad_logits[0, :, 1, 1] == 0)

    def test_all_ignored(self, random_tensor):
        out = softmax_cross_entropy(random_tensor((1, 2, 2, 2)), np.full((1, 2, 2), 255), np.ones(2))
        assert out.loss == 0.0
        assert not out.grad_logits.any()

    def test_label_out_of_range(self, random_tensor):
        with pytest.raises(DataError):
            softmax_cross_entropy(random_tensor((1, 2, 1, 2)), np.array([[[0, 2]]]), np.ones(2))

    def test_large_logits_are_stable(self):
        logits = np.array([1000.0, -1000.0]).reshape(1, 2, 1, 1)
        out = softmax_cross_entropy(logits, np.array([[[0]]]), np.ones(2))
        assert np.isfinite(out.loss)
        assert out.loss < 1e-6

"""
Tests du max-pooling en mode ceil et du dépliage par indices
"""

import numpy as np
import pytest

from layers.pool_layers import origin_record
from utils.exceptions import ShapeError, SizingError
from utils.nn_ops import max_unpool, max_unpool_backward, maxpool_backward, maxpool_forward, pool_output_size
from utils.tensor_core import Rng


def _distinct_tensor(seed: int):
    """Tenseur aux valeurs strictement positives et distinctes, de taille aléatoire"""
    rng = Rng(seed)
    n = 1 + int(rng.integers(2, 1)[0])
    c = 1 + int(rng.integers(3, 1)[0])
    h = 3 + int(rng.integers(10, 1)[0])
    w = 3 + int(rng.integers(10, 1)[0])
    size = n * c * h * w
    order = np.argsort(rng.uniform(size))
    return (order + 1).astype(np.float64).reshape(n, c, h, w)


class TestMaxPool:
    """Sorties, indices et départage des égalités"""

    @pytest.mark.parametrize("seed", range(100))
    def test_ceil_mode_sizes(self, seed):
        x = _distinct_tensor(seed)
        y, record = maxpool_forward(x)
        h, w = x.shape[2:]
        expected = (pool_output_size(h, 3, 2), pool_output_size(w, 3, 2))
        assert y.shape[2:] == expected
        assert expected == (-(-(h - 3) // 2) + 1, -(-(w - 3) // 2) + 1)
        assert record.in_dims == (h, w)

    def test_values_are_window_maxima(self):
        x = np.arange(25, dtype=np.float64).reshape(1, 1, 5, 5)
        y, record = maxpool_forward(x)
        assert np.array_equal(y[0, 0], [[12, 14], [22, 24]])
        assert np.array_equal(record.indices[0, 0], [[12, 14], [22, 24]])

    def test_truncated_border_window(self):
        """Entrée 4x4 : la seconde fenêtre ne couvre que deux lignes valides"""
        x = np.zeros((1, 1, 4, 4))
        x[0, 0, 3, 3] = 5.0
        y, record = maxpool_forward(x)
        assert y.shape == (1, 1, 2, 2)
        assert y[0, 0, 1, 1] == 5.0
        assert record.indices[0, 0, 1, 1] == 15

    def test_ties_pick_smallest_flat_index(self):
        x = np.ones((1, 2, 7, 6))
        _, record = maxpool_forward(x)
        ho, wo = record.indices.shape[2:]
        rows = np.arange(ho).reshape(-1, 1) * 2
        cols = np.arange(wo).reshape(1, -1) * 2
        assert np.array_equal(record.indices[0, 1], rows * 6 + cols)

    def test_too_small_input(self):
        with pytest.raises(SizingError):
            maxpool_forward(np.zeros((1, 1, 2, 5)))

    def test_backward_routes_to_maxima(self):
        x = _distinct_tensor(3)
        y, record = maxpool_forward(x)
        grad_y = Rng(4).normal(y.size).reshape(y.shape)
        grad_x = maxpool_backward(record, grad_y)
        assert grad_x.shape == x.shape
        assert np.isclose(grad_x.sum(), grad_y.sum())
        nonzero = np.flatnonzero(grad_x.reshape(x.shape[0] * x.shape[1], -1)[0])
        assert set(nonzero.tolist()) <= set(record.indices[0, 0].ravel().tolist())


class TestMaxUnpool:
    """Dépliage par indices partagés"""

    @pytest.mark.parametrize("seed", range(100))
    def test_unpool_of_pool_places_recorded_maxima(self, seed):
        x = _distinct_tensor(seed)
        y, record = maxpool_forward(x)
        out = max_unpool(y, record)
        assert out.shape == x.shape
        n, c, ho, wo = y.shape
        for b in range(n):
            for ch in range(c):
                plane = out[b, ch].ravel()
                nonzero = np.flatnonzero(plane)
                recorded = set(record.indices[b, ch].ravel().tolist())
                # chaque valeur non nulle est la valeur d'entrée d'un maximum enregistré
                assert set(nonzero.tolist()) <= recorded
                assert np.array_equal(plane[nonzero], x[b, ch].ravel()[nonzero])
                assert len(nonzero) <= ho * wo
                # chaque maximum enregistré est restitué
                assert set(nonzero.tolist()) == recorded

    def test_unpool_backward_gathers(self):
        x = _distinct_tensor(5)
        y, record = maxpool_forward(x)
        grad = max_unpool_backward(record, x)
        assert grad.shape == y.shape
        # les fenêtres qui se recouvrent peuvent désigner la même position
        assert np.all((grad == y) | (grad == 0))

    def test_unpool_is_adjoint_of_its_backward(self):
        x = _distinct_tensor(6)
        y, record = maxpool_forward(x)
        u = Rng(1).normal(y.size).reshape(y.shape)
        v = Rng(2).normal(x.size).reshape(x.shape)
        assert np.isclose((max_unpool(u, record) * v).sum(), (u * max_unpool_backward(record, v)).sum())

    def test_record_shape_mismatch(self):
        x = _distinct_tensor(7)
        _, record = maxpool_forward(x)
        with pytest.raises(ShapeError):
            max_unpool(np.zeros((1, 1, 1, 1)), record)

    def test_origin_record_ignores_argmax(self):
        x = _distinct_tensor(8)
        y, record = maxpool_forward(x)
        origin = origin_record(record)
        ho, wo = y.shape[2:]
        w = x.shape[3]
        rows = np.arange(ho).reshape(-1, 1) * 2
        cols = np.arange(wo).reshape(1, -1) * 2
        assert np.array_equal(origin.indices[0, 0], rows * w + cols)

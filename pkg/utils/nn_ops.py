"""
Noyaux numériques avec passe arrière explicite :
convolution, déconvolution, max-pooling (mode ceil) avec indices, dépliage par indices,
ReLU, recadrage, dropout et entropie croisée pondérée

Toutes les fonctions sont pures et conservent le dtype de leurs entrées.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from models.op_types import ConvSpec, LossOutput, PoolRecord
from utils.exceptions import DataError, ShapeError, SizingError
from utils.tensor_core import Rng


# =============================================================================
# Règles de taille
# =============================================================================

def conv_output_size(size: int, kernel: int, stride: int, pad: int) -> int:
    """floor((size + 2p - k) / s) + 1"""
    return (size + 2 * pad - kernel) // stride + 1


def deconv_output_size(size: int, kernel: int, stride: int, pad: int) -> int:
    """(size - 1) * s + k - 2p"""
    return (size - 1) * stride + kernel - 2 * pad


def pool_output_size(size: int, kernel: int, stride: int) -> int:
    """Mode ceil : ceil((size - k) / s) + 1"""
    return -(-(size - kernel) // stride) + 1


def _check_rank4(name: str, x: np.ndarray) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{name}: tenseur de rang 4 attendu, reçu {x.shape}")


def _strided(size: int, stride: int, offset: int) -> slice:
    return slice(offset, offset + stride * (size - 1) + 1, stride)


# =============================================================================
# Convolution
# =============================================================================

def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """
    Corrélation 2D directe : y[n,o,i,j] = b[o] + sum x[n,c,i*s-p+u,j*s-p+v] * w[o,c,u,v]

    Args:
        x: (n, c, h, w)
        w: (out_c, c, kh, kw)
        b: (out_c,)
        spec: pas et remplissage

    Returns:
        (n, out_c, ho, wo)
    """
    _check_rank4("conv2d", x)
    n, c, h, wd = x.shape
    out_c, in_c, kh, kw = w.shape
    if in_c != c:
        raise ShapeError(f"conv2d: {c} canaux en entrée, noyau pour {in_c}")
    if b.shape != (out_c,):
        raise ShapeError(f"conv2d: biais {b.shape}, attendu ({out_c},)")
    s, p = spec.stride, spec.pad
    ho, wo = conv_output_size(h, kh, s, p), conv_output_size(wd, kw, s, p)
    if ho < 1 or wo < 1:
        raise SizingError(f"conv2d: sortie {ho}x{wo} pour entrée {h}x{wd}")

    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
    out = np.zeros((out_c, n, ho, wo), dtype=np.result_type(x, w))
    for u in range(kh):
        for v in range(kw):
            patch = xp[:, :, _strided(ho, s, u), _strided(wo, s, v)]
            out += np.tensordot(w[:, :, u, v], patch, axes=([1], [1]))
    out += b.reshape(-1, 1, 1, 1)
    return np.ascontiguousarray(out.transpose(1, 0, 2, 3))


def conv2d_backward(x: np.ndarray, w: np.ndarray, spec: ConvSpec,
                    grad_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients exacts de conv2d_forward

    Returns:
        (grad_x, grad_w, grad_b)
    """
    _check_rank4("conv2d_backward", x)
    n, c, h, wd = x.shape
    out_c, _, kh, kw = w.shape
    s, p = spec.stride, spec.pad
    ho, wo = conv_output_size(h, kh, s, p), conv_output_size(wd, kw, s, p)
    if grad_y.shape != (n, out_c, ho, wo):
        raise ShapeError(f"conv2d_backward: grad_y {grad_y.shape}, attendu {(n, out_c, ho, wo)}")

    dtype = np.result_type(x, w, grad_y)
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
    grad_xp = np.zeros(xp.shape, dtype=dtype)
    grad_w = np.zeros(w.shape, dtype=dtype)
    for u in range(kh):
        for v in range(kw):
            rows, cols = _strided(ho, s, u), _strided(wo, s, v)
            grad_w[:, :, u, v] = np.tensordot(grad_y, xp[:, :, rows, cols], axes=([0, 2, 3], [0, 2, 3]))
            # (n, ho, wo, c) -> (n, c, ho, wo)
            grad_xp[:, :, rows, cols] += np.tensordot(grad_y, w[:, :, u, v], axes=([1], [0])).transpose(0, 3, 1, 2)
    grad_x = grad_xp[:, :, p:p + h, p:p + wd] if p else grad_xp
    grad_b = grad_y.sum(axis=(0, 2, 3)).astype(dtype)
    return np.ascontiguousarray(grad_x), grad_w, grad_b


# =============================================================================
# Déconvolution (convolution transposée)
# =============================================================================

def deconv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """
    Convolution fractionnaire : chaque entrée diffuse son noyau pondéré, sortie (in - 1)*s + k - 2p

    Args:
        x: (n, in_c, h, w)
        w: (in_c, out_c, kh, kw)
        b: (out_c,)
    """
    _check_rank4("deconv2d", x)
    n, c, h, wd = x.shape
    in_c, out_c, kh, kw = w.shape
    if in_c != c:
        raise ShapeError(f"deconv2d: {c} canaux en entrée, noyau pour {in_c}")
    if b.shape != (out_c,):
        raise ShapeError(f"deconv2d: biais {b.shape}, attendu ({out_c},)")
    s, p = spec.stride, spec.pad
    ho, wo = deconv_output_size(h, kh, s, p), deconv_output_size(wd, kw, s, p)
    if ho < 1 or wo < 1:
        raise SizingError(f"deconv2d: sortie {ho}x{wo} pour entrée {h}x{wd}")

    full = np.zeros((n, out_c, ho + 2 * p, wo + 2 * p), dtype=np.result_type(x, w))
    for u in range(kh):
        for v in range(kw):
            full[:, :, _strided(h, s, u), _strided(wd, s, v)] += \
                np.tensordot(x, w[:, :, u, v], axes=([1], [0])).transpose(0, 3, 1, 2)
    y = full[:, :, p:p + ho, p:p + wo] + b.reshape(1, -1, 1, 1)
    return np.ascontiguousarray(y)


def deconv2d_backward(x: np.ndarray, w: np.ndarray, spec: ConvSpec,
                      grad_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Gradients exacts de deconv2d_forward ; grad_x est une convolution à pas s de grad_y par w

    Returns:
        (grad_x, grad_w, grad_b)
    """
    _check_rank4("deconv2d_backward", x)
    n, c, h, wd = x.shape
    in_c, out_c, kh, kw = w.shape
    s, p = spec.stride, spec.pad
    ho, wo = deconv_output_size(h, kh, s, p), deconv_output_size(wd, kw, s, p)
    if grad_y.shape != (n, out_c, ho, wo):
        raise ShapeError(f"deconv2d_backward: grad_y {grad_y.shape}, attendu {(n, out_c, ho, wo)}")

    dtype = np.result_type(x, w, grad_y)
    grad_full = np.pad(grad_y, ((0, 0), (0, 0), (p, p), (p, p))) if p else grad_y
    grad_x = np.zeros((n, in_c, h, wd), dtype=dtype)
    grad_w = np.zeros(w.shape, dtype=dtype)
    for u in range(kh):
        for v in range(kw):
            patch = grad_full[:, :, _strided(h, s, u), _strided(wd, s, v)]
            grad_x += np.tensordot(patch, w[:, :, u, v], axes=([1], [1])).transpose(0, 3, 1, 2)
            grad_w[:, :, u, v] = np.tensordot(x, patch, axes=([0, 2, 3], [0, 2, 3]))
    grad_b = grad_y.sum(axis=(0, 2, 3)).astype(dtype)
    return grad_x, grad_w, grad_b


# =============================================================================
# Max-pooling et dépliage par indices
# =============================================================================

def maxpool_forward(x: np.ndarray, k: int = 3, s: int = 2) -> Tuple[np.ndarray, PoolRecord]:
    """
    Max-pooling en mode ceil, fenêtres de bord tronquées à la partie valide

    Les égalités sont départagées par le plus petit indice plat.

    Returns:
        (y, PoolRecord)
    """
    _check_rank4("maxpool", x)
    n, c, h, wd = x.shape
    if h < k or wd < k:
        raise SizingError(f"maxpool: entrée {h}x{wd} plus petite que le noyau {k}x{k}")
    ho, wo = pool_output_size(h, k, s), pool_output_size(wd, k, s)
    hp, wp = (ho - 1) * s + k, (wo - 1) * s + k

    padded = np.full((n, c, hp, wp), -np.inf, dtype=x.dtype)
    padded[:, :, :h, :wd] = x
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))[:, :, ::s, ::s]
    flat = windows.reshape(n, c, ho, wo, k * k)
    arg = flat.argmax(axis=-1)
    y = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    du, dv = np.divmod(arg, k)
    rows = np.arange(ho).reshape(1, 1, ho, 1) * s + du
    cols = np.arange(wo).reshape(1, 1, 1, wo) * s + dv
    indices = (rows * wd + cols).astype(np.int64)
    return np.ascontiguousarray(y), PoolRecord(indices=indices, in_dims=(h, wd), kernel=k, stride=s)


def _check_record(rec: PoolRecord, pooled: Optional[np.ndarray], name: str) -> None:
    if pooled is not None and pooled.shape != rec.out_shape:
        raise ShapeError(f"{name}: tenseur {pooled.shape}, enregistrement {rec.out_shape}")
    h, w = rec.in_dims
    if rec.indices.size and (rec.indices.min() < 0 or rec.indices.max() >= h * w):
        raise DataError(f"{name}: indice hors du plan {h}x{w} (enregistrement corrompu)")


def maxpool_backward(rec: PoolRecord, grad_y: np.ndarray) -> np.ndarray:
    """Gradient nul sauf aux maxima enregistrés, où les contributions s'accumulent"""
    _check_record(rec, grad_y, "maxpool_backward")
    n, c = grad_y.shape[:2]
    h, w = rec.in_dims
    grad_x = np.bincount(rec.plane_keys(), weights=grad_y.ravel(), minlength=n * c * h * w)
    return grad_x.astype(grad_y.dtype).reshape(n, c, h, w)


def _last_writer_mask(keys: np.ndarray) -> np.ndarray:
    """Pour des positions cibles répétées, seule la dernière écriture (ordre ligne majeure) est retenue"""
    reversed_keys = keys[::-1]
    _, first_in_reversed = np.unique(reversed_keys, return_index=True)
    mask = np.zeros(keys.shape, dtype=bool)
    mask[keys.size - 1 - first_in_reversed] = True
    return mask


def max_unpool(x: np.ndarray, rec: PoolRecord) -> np.ndarray:
    """
    Replace chaque valeur à la position argmax enregistrée par le pooling apparié, zéro ailleurs

    Returns:
        (n, c, h, w) avec (h, w) = rec.in_dims
    """
    _check_record(rec, x, "max_unpool")
    n, c = x.shape[:2]
    h, w = rec.in_dims
    keys = rec.plane_keys()
    winners = _last_writer_mask(keys)
    out = np.zeros(n * c * h * w, dtype=x.dtype)
    out[keys[winners]] = x.ravel()[winners]
    return out.reshape(n, c, h, w)


def max_unpool_backward(rec: PoolRecord, grad_y: np.ndarray) -> np.ndarray:
    """Collecte du gradient aux positions cibles ; les écritures écrasées reçoivent zéro"""
    n, c = rec.out_shape[:2]
    h, w = rec.in_dims
    if grad_y.shape != (n, c, h, w):
        raise ShapeError(f"max_unpool_backward: grad_y {grad_y.shape}, attendu {(n, c, h, w)}")
    _check_record(rec, None, "max_unpool_backward")
    keys = rec.plane_keys()
    gathered = grad_y.ravel()[keys] * _last_writer_mask(keys)
    return gathered.astype(grad_y.dtype).reshape(rec.out_shape)


# =============================================================================
# Activation, recadrage, dropout
# =============================================================================

def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
    """Dérivée nulle en 0"""
    return np.where(x > 0, grad_y, 0).astype(grad_y.dtype)


def crop_center(x: np.ndarray, border: int) -> np.ndarray:
    """Retire border lignes et colonnes de chaque côté"""
    _check_rank4("crop_center", x)
    if border < 0:
        raise ShapeError(f"crop_center: bordure négative {border}")
    if border == 0:
        return x
    h, w = x.shape[2:]
    if h <= 2 * border or w <= 2 * border:
        raise SizingError(f"crop_center: entrée {h}x{w} trop petite pour une bordure {border}")
    return x[:, :, border:h - border, border:w - border]


def crop_center_backward(grad_y: np.ndarray, border: int) -> np.ndarray:
    """Replace le gradient au centre d'une bordure nulle"""
    if border == 0:
        return grad_y
    return np.pad(grad_y, ((0, 0), (0, 0), (border, border), (border, border)))


def dropout(x: np.ndarray, p: float, rng: Optional[Rng],
            training: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Dropout inversé : en entraînement, chaque élément est annulé avec probabilité p
    et les survivants sont multipliés par 1 / (1 - p)

    Returns:
        (y, mask) ; mask vaut None quand l'opération est l'identité
    """
    if not 0 <= p < 1:
        raise ShapeError(f"dropout: probabilité {p} hors de [0, 1)")
    if not training or p == 0:
        return x, None
    if rng is None:
        raise ShapeError("dropout: générateur requis en entraînement")
    keep = rng.uniform(x.size).reshape(x.shape) >= p
    mask = keep.astype(x.dtype) / x.dtype.type(1 - p)
    return x * mask, mask


def dropout_backward(mask: Optional[np.ndarray], grad_y: np.ndarray) -> np.ndarray:
    return grad_y if mask is None else grad_y * mask


# =============================================================================
# Perte
# =============================================================================

def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray, class_weights: np.ndarray,
                          ignore_id: int = 255) -> LossOutput:
    """
    Entropie croisée softmax pondérée, normalisée par la somme des poids appliqués

    Args:
        logits: (n, K, h, w)
        labels: (n, h, w) identifiants dans [0, K) ou ignore_id
        class_weights: (K,)
        ignore_id: identifiant exclu de la perte

    Returns:
        LossOutput ; gradient nul aux pixels ignorés

    Raises:
        DataError: identifiant >= K différent de ignore_id
    """
    _check_rank4("softmax_cross_entropy", logits)
    n, num_classes, h, w = logits.shape
    labels = np.asarray(labels)
    if labels.shape != (n, h, w):
        raise ShapeError(f"étiquettes {labels.shape}, attendu {(n, h, w)}")
    class_weights = np.asarray(class_weights, dtype=logits.dtype)
    if class_weights.shape != (num_classes,):
        raise ShapeError(f"poids {class_weights.shape}, attendu ({num_classes},)")

    counted = labels != ignore_id
    if ((labels[counted] < 0) | (labels[counted] >= num_classes)).any():
        bad = labels[counted & ((labels < 0) | (labels >= num_classes))][0]
        raise DataError(f"étiquette {int(bad)} hors de [0, {num_classes})")

    counted_pixels = int(counted.sum())
    safe_labels = np.where(counted, labels, 0).astype(np.int64)
    pixel_weights = class_weights[safe_labels] * counted
    weight_sum = pixel_weights.sum()
    if counted_pixels == 0 or weight_sum <= 0:
        return LossOutput(loss=0.0, grad_logits=np.zeros_like(logits), counted_pixels=counted_pixels)

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    target_log_probs = np.take_along_axis(log_probs, safe_labels[:, None], axis=1)[:, 0]
    loss = float(-(pixel_weights * target_log_probs).sum() / weight_sum)

    grad = np.exp(log_probs)
    target = np.take_along_axis(grad, safe_labels[:, None], axis=1)
    np.put_along_axis(grad, safe_labels[:, None], target - 1, axis=1)
    grad *= (pixel_weights / weight_sum)[:, None]
    return LossOutput(loss=loss, grad_logits=grad.astype(logits.dtype), counted_pixels=counted_pixels)

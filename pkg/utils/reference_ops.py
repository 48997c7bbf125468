"""
Oracles naïfs (boucles imbriquées) servant de référence normative aux noyaux optimisés
Lents : réservés aux petits tenseurs des tests et de la vérification
"""

import numpy as np

from models.op_types import ConvSpec
from utils.nn_ops import conv_output_size, deconv_output_size


def conv2d_naive(x: np.ndarray, w: np.ndarray, b: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Convolution directe en six boucles imbriquées, calcul en float64"""
    n, c, h, wd = x.shape
    out_c, _, kh, kw = w.shape
    s, p = spec.stride, spec.pad
    ho, wo = conv_output_size(h, kh, s, p), conv_output_size(wd, kw, s, p)
    y = np.zeros((n, out_c, ho, wo))
    for bi in range(n):
        for o in range(out_c):
            for i in range(ho):
                for j in range(wo):
                    acc = float(b[o])
                    for ch in range(c):
                        for u in range(kh):
                            row = i * s - p + u
                            if not 0 <= row < h:
                                continue
                            for v in range(kw):
                                col = j * s - p + v
                                if 0 <= col < wd:
                                    acc += float(x[bi, ch, row, col]) * float(w[o, ch, u, v])
                    y[bi, o, i, j] = acc
    return y


def deconv2d_naive(x: np.ndarray, w: np.ndarray, b: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Déconvolution par diffusion élément par élément, calcul en float64"""
    n, c, h, wd = x.shape
    _, out_c, kh, kw = w.shape
    s, p = spec.stride, spec.pad
    ho, wo = deconv_output_size(h, kh, s, p), deconv_output_size(wd, kw, s, p)
    y = np.zeros((n, out_c, ho, wo))
    for bi in range(n):
        for ch in range(c):
            for i in range(h):
                for j in range(wd):
                    value = float(x[bi, ch, i, j])
                    for o in range(out_c):
                        for u in range(kh):
                            row = i * s + u - p
                            if not 0 <= row < ho:
                                continue
                            for v in range(kw):
                                col = j * s + v - p
                                if 0 <= col < wo:
                                    y[bi, o, row, col] += value * float(w[ch, o, u, v])
    y += np.asarray(b, dtype=np.float64).reshape(1, -1, 1, 1)
    return y

"""
Types de données des noyaux numériques : convolution, pooling, perte
"""

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from utils.exceptions import ShapeError


@dataclass(frozen=True)
class ConvSpec:
    """Spécification d'une convolution (ou déconvolution)"""
    out_channels: int
    kernel: Tuple[int, int]
    stride: int = 1
    pad: int = 0
    bias: bool = True

    def __post_init__(self):
        kh, kw = self.kernel
        if kh < 1 or kw < 1 or self.stride < 1 or self.pad < 0 or self.out_channels < 1:
            raise ShapeError(f"ConvSpec invalide: {self}")

    def describe(self) -> str:
        """Notation du tableau de couches, ex: '7x7/2 (x96)'"""
        kh, kw = self.kernel
        return f"{kh}x{kw}/{self.stride} (x{self.out_channels})"

    def to_dict(self) -> Dict:
        """Convertit en dictionnaire"""
        return {
            "out_channels": self.out_channels,
            "kernel": list(self.kernel),
            "stride": self.stride,
            "pad": self.pad,
            "bias": self.bias,
        }


@dataclass
class PoolRecord:
    """
    Indices argmax d'un max-pooling, partagés avec le dépliage apparié

    indices: (n, c, ho, wo) position plate h*w (ligne majeure) du maximum dans le plan d'entrée
    in_dims: (h, w) du plan avant pooling
    """
    indices: np.ndarray
    in_dims: Tuple[int, int]
    kernel: int = 3
    stride: int = 2

    @property
    def out_shape(self) -> Tuple[int, int, int, int]:
        return tuple(self.indices.shape)

    def plane_keys(self) -> np.ndarray:
        """Positions plates globales (plan n*c compris), à plat dans l'ordre ligne majeure"""
        n, c, ho, wo = self.indices.shape
        h, w = self.in_dims
        planes = np.arange(n * c, dtype=np.int64).reshape(n, c, 1, 1) * (h * w)
        return (planes + self.indices).ravel()


@dataclass
class LossOutput:
    """Résultat de l'entropie croisée pondérée"""
    loss: float
    grad_logits: np.ndarray
    counted_pixels: int

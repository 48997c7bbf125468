"""
Max-pooling 3x3/2 (mode ceil) et dépliage par indices partagés
"""

from typing import Any, Dict, Optional

import numpy as np

from layers.base_layer import BaseLayer, ExecutionContext, Shape
from models.op_types import PoolRecord
from utils.exceptions import ShapeError, SizingError
from utils.nn_ops import (
    maxpool_forward, maxpool_backward, max_unpool, max_unpool_backward, pool_output_size
)


class MaxPoolLayer(BaseLayer):
    """
    Max-pooling ; enregistre ses indices dans le contexte pour le dépliage apparié
    et ses dimensions (entrée, sortie) dans pool_dims pour l'inférence de formes
    """

    kind = "maxpool"

    def __init__(self, name: str, kernel: int = 3, stride: int = 2, table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.kernel = kernel
        self.stride = stride

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        if h < self.kernel or w < self.kernel:
            raise SizingError(f"entrée {w}x{h} plus petite que le noyau {self.kernel}x{self.kernel}",
                              layer=self.name)
        ho = pool_output_size(h, self.kernel, self.stride)
        wo = pool_output_size(w, self.kernel, self.stride)
        pool_dims[self.name] = ((h, w), (ho, wo), c)
        return (c, ho, wo)

    def forward(self, x, params, ctx: ExecutionContext):
        h, w = x.shape[2:]
        if h < self.kernel or w < self.kernel:
            raise SizingError(f"entrée {w}x{h} plus petite que le noyau {self.kernel}x{self.kernel}",
                              layer=self.name)
        y, record = maxpool_forward(x, self.kernel, self.stride)
        ctx.pool_records[self.name] = record
        return y, record

    def backward(self, grad_y, params, cache: PoolRecord, ctx: ExecutionContext):
        return maxpool_backward(cache, grad_y), {}

    def describe(self) -> str:
        return f"{self.kernel}x{self.kernel}/{self.stride}"


def origin_record(record: PoolRecord) -> PoolRecord:
    """
    Enregistrement qui place chaque valeur au coin supérieur gauche de sa fenêtre,
    indépendamment de l'argmax : dépliage à remplissage de zéros sans partage d'indices
    """
    n, c, ho, wo = record.out_shape
    h, w = record.in_dims
    rows = np.arange(ho, dtype=np.int64).reshape(ho, 1) * record.stride
    cols = np.arange(wo, dtype=np.int64).reshape(1, wo) * record.stride
    plane = rows * w + cols
    indices = np.broadcast_to(plane, (n, c, ho, wo)).copy()
    return PoolRecord(indices=indices, in_dims=(h, w), kernel=record.kernel, stride=record.stride)


class UnpoolLayer(BaseLayer):
    """Dépliage vers les dimensions d'avant pooling, aux positions argmax du pooling apparié"""

    kind = "unpool"

    def __init__(self, name: str, pool_name: str, share_indices: bool = True,
                 table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.pool_name = pool_name
        self.share_indices = share_indices

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        if self.pool_name not in pool_dims:
            raise ShapeError(f"couche {self.name}: pooling apparié {self.pool_name} non exécuté")
        (h, w), pooled, pooled_c = pool_dims[self.pool_name]
        c, hi, wi = in_shape
        if (hi, wi) != tuple(pooled) or c != pooled_c:
            raise ShapeError(f"couche {self.name}: entrée {wi}x{hi}x{c}, "
                             f"{self.pool_name} a produit {pooled[1]}x{pooled[0]}x{pooled_c}")
        return (c, h, w)

    def _record(self, ctx: ExecutionContext) -> PoolRecord:
        if self.pool_name not in ctx.pool_records:
            raise ShapeError(f"couche {self.name}: aucun indice enregistré par {self.pool_name}")
        record = ctx.pool_records[self.pool_name]
        return record if self.share_indices else origin_record(record)

    def forward(self, x, params, ctx: ExecutionContext):
        record = self._record(ctx)
        return max_unpool(x, record), record

    def backward(self, grad_y, params, cache: PoolRecord, ctx: ExecutionContext):
        return max_unpool_backward(cache, grad_y), {}

    def describe(self) -> str:
        return f"indices {self.pool_name}"

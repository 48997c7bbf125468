"""
Couches sans paramètres : recadrage central et dropout
"""

from typing import Any, Dict, Optional

from layers.base_layer import BaseLayer, ExecutionContext, Shape
from utils.exceptions import ShapeError, SizingError
from utils.nn_ops import crop_center, crop_center_backward, dropout, dropout_backward


class CropLayer(BaseLayer):
    """Retire `border` lignes et colonnes de chaque côté"""

    kind = "crop"

    def __init__(self, name: str, border: int = 1, table_row: Optional[str] = None):
        super().__init__(name, table_row)
        if border < 0:
            raise ShapeError(f"couche {name}: bordure négative {border}")
        self.border = border

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        ho, wo = h - 2 * self.border, w - 2 * self.border
        if ho < 1 or wo < 1:
            raise SizingError(f"entrée {w}x{h} trop petite pour une bordure {self.border}", layer=self.name)
        return (c, ho, wo)

    def forward(self, x, params, ctx: ExecutionContext):
        return crop_center(x, self.border), None

    def backward(self, grad_y, params, cache, ctx: ExecutionContext):
        return crop_center_backward(grad_y, self.border), {}

    def describe(self) -> str:
        return f"crop {self.border}"


class DropoutLayer(BaseLayer):
    """Dropout inversé, actif uniquement en entraînement"""

    kind = "dropout"

    def __init__(self, name: str, rate: float = 0.5, table_row: Optional[str] = None):
        super().__init__(name, table_row)
        if not 0 <= rate < 1:
            raise ShapeError(f"couche {name}: taux de dropout {rate} hors de [0, 1)")
        self.rate = rate

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        return in_shape

    def forward(self, x, params, ctx: ExecutionContext):
        return dropout(x, self.rate, ctx.rng, ctx.training)

    def backward(self, grad_y, params, cache, ctx: ExecutionContext):
        return dropout_backward(cache, grad_y), {}

    def describe(self) -> str:
        return f"p={self.rate:g}"

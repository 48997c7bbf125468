"""
Modules Fire (encodeur) et DFire (décodeur)

Fire  : s = relu(squeeze1x1(x)) ; y = concat(relu(expand1x1(s)), relu(expand3x3(s)))
DFire : c = concat(relu(expand1x1(x)), relu(expand3x3(x))) ; y = relu(squeeze1x1(c))
Les expansions 3x3 utilisent un remplissage de 1 : la taille spatiale est conservée.
"""

from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from layers.base_layer import BaseLayer, ExecutionContext, Shape
from layers.conv_layers import conv_relu_forward, conv_relu_backward
from models.fire_specs import DFireSpec, FireSpec
from models.op_types import ConvSpec
from utils.exceptions import ShapeError
from utils.tensor_core import concat_channels, split_channels


def _conv1x1(out_c: int) -> ConvSpec:
    return ConvSpec(out_c, (1, 1), 1, 0)


def _conv3x3(out_c: int) -> ConvSpec:
    return ConvSpec(out_c, (3, 3), 1, 1)


def _get(params: Mapping[str, np.ndarray], prefix: str, local: str) -> np.ndarray:
    return params[f"{prefix}.{local}"]


def fire_forward(x: np.ndarray, spec: FireSpec, params: Mapping[str, np.ndarray],
                 prefix: str = "fire") -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """
    Passe avant d'un module Fire

    Args:
        x: (n, in_c, h, w)
        spec: Largeurs du module
        params: Paramètres, noms {prefix}.squeeze.w, {prefix}.expand1.b, ...
        prefix: Préfixe des paramètres

    Returns:
        (y de forme (n, expand1_c + expand3_c, h, w), cache)
    """
    if x.shape[1] != spec.in_c:
        raise ShapeError(f"{prefix}: {x.shape[1]} canaux en entrée, attendu {spec.in_c}")
    s, s_pre = conv_relu_forward(x, _get(params, prefix, "squeeze.w"), _get(params, prefix, "squeeze.b"),
                                 _conv1x1(spec.squeeze_c))
    e1, e1_pre = conv_relu_forward(s, _get(params, prefix, "expand1.w"), _get(params, prefix, "expand1.b"),
                                   _conv1x1(spec.expand1_c))
    e3, e3_pre = conv_relu_forward(s, _get(params, prefix, "expand3.w"), _get(params, prefix, "expand3.b"),
                                   _conv3x3(spec.expand3_c))
    cache = {"x": x, "s": s, "s_pre": s_pre, "e1_pre": e1_pre, "e3_pre": e3_pre}
    return concat_channels(e1, e3), cache


def fire_backward(spec: FireSpec, params: Mapping[str, np.ndarray], cache: Dict[str, np.ndarray],
                  grad_y: np.ndarray, prefix: str = "fire") -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """
    Passe arrière d'un module Fire

    Returns:
        (grad_x, gradients des paramètres)
    """
    g1, g3 = split_channels(grad_y, spec.expand1_c)
    gs1, gw1, gb1 = conv_relu_backward(cache["s"], _get(params, prefix, "expand1.w"),
                                       _conv1x1(spec.expand1_c), cache["e1_pre"], g1)
    gs3, gw3, gb3 = conv_relu_backward(cache["s"], _get(params, prefix, "expand3.w"),
                                       _conv3x3(spec.expand3_c), cache["e3_pre"], g3)
    gx, gws, gbs = conv_relu_backward(cache["x"], _get(params, prefix, "squeeze.w"),
                                      _conv1x1(spec.squeeze_c), cache["s_pre"], gs1 + gs3)
    grads = {
        f"{prefix}.squeeze.w": gws, f"{prefix}.squeeze.b": gbs,
        f"{prefix}.expand1.w": gw1, f"{prefix}.expand1.b": gb1,
        f"{prefix}.expand3.w": gw3, f"{prefix}.expand3.b": gb3,
    }
    return gx, grads


def dfire_forward(x: np.ndarray, spec: DFireSpec, params: Mapping[str, np.ndarray],
                  prefix: str = "dfire") -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """
    Passe avant d'un module DFire

    Returns:
        (y de forme (n, squeeze_out_c, h, w), cache)
    """
    if x.shape[1] != spec.in_c:
        raise ShapeError(f"{prefix}: {x.shape[1]} canaux en entrée, attendu {spec.in_c}")
    e1, e1_pre = conv_relu_forward(x, _get(params, prefix, "expand1.w"), _get(params, prefix, "expand1.b"),
                                   _conv1x1(spec.expand1_c))
    e3, e3_pre = conv_relu_forward(x, _get(params, prefix, "expand3.w"), _get(params, prefix, "expand3.b"),
                                   _conv3x3(spec.expand3_c))
    c = concat_channels(e1, e3)
    y, y_pre = conv_relu_forward(c, _get(params, prefix, "squeeze.w"), _get(params, prefix, "squeeze.b"),
                                 _conv1x1(spec.squeeze_out_c))
    cache = {"x": x, "c": c, "e1_pre": e1_pre, "e3_pre": e3_pre, "y_pre": y_pre}
    return y, cache


def dfire_backward(spec: DFireSpec, params: Mapping[str, np.ndarray], cache: Dict[str, np.ndarray],
                   grad_y: np.ndarray, prefix: str = "dfire") -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    """
    Passe arrière d'un module DFire

    Returns:
        (grad_x, gradients des paramètres)
    """
    gc, gws, gbs = conv_relu_backward(cache["c"], _get(params, prefix, "squeeze.w"),
                                      _conv1x1(spec.squeeze_out_c), cache["y_pre"], grad_y)
    g1, g3 = split_channels(gc, spec.expand1_c)
    gx1, gw1, gb1 = conv_relu_backward(cache["x"], _get(params, prefix, "expand1.w"),
                                       _conv1x1(spec.expand1_c), cache["e1_pre"], g1)
    gx3, gw3, gb3 = conv_relu_backward(cache["x"], _get(params, prefix, "expand3.w"),
                                       _conv3x3(spec.expand3_c), cache["e3_pre"], g3)
    grads = {
        f"{prefix}.expand1.w": gw1, f"{prefix}.expand1.b": gb1,
        f"{prefix}.expand3.w": gw3, f"{prefix}.expand3.b": gb3,
        f"{prefix}.squeeze.w": gws, f"{prefix}.squeeze.b": gbs,
    }
    return gx1 + gx3, grads


def fire_param_shapes(spec: FireSpec) -> Dict[str, Tuple[int, ...]]:
    return {
        "squeeze.w": (spec.squeeze_c, spec.in_c, 1, 1), "squeeze.b": (spec.squeeze_c,),
        "expand1.w": (spec.expand1_c, spec.squeeze_c, 1, 1), "expand1.b": (spec.expand1_c,),
        "expand3.w": (spec.expand3_c, spec.squeeze_c, 3, 3), "expand3.b": (spec.expand3_c,),
    }


def dfire_param_shapes(spec: DFireSpec) -> Dict[str, Tuple[int, ...]]:
    width = spec.expand1_c + spec.expand3_c
    return {
        "expand1.w": (spec.expand1_c, spec.in_c, 1, 1), "expand1.b": (spec.expand1_c,),
        "expand3.w": (spec.expand3_c, spec.in_c, 3, 3), "expand3.b": (spec.expand3_c,),
        "squeeze.w": (spec.squeeze_out_c, width, 1, 1), "squeeze.b": (spec.squeeze_out_c,),
    }


class FireLayer(BaseLayer):
    """Module Fire de l'encodeur"""

    kind = "fire"

    def __init__(self, name: str, spec: FireSpec, table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.spec = spec

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        if c != self.spec.in_c:
            raise ShapeError(f"couche {self.name}: {c} canaux en entrée, attendu {self.spec.in_c}")
        return (self.spec.out_c, h, w)

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return fire_param_shapes(self.spec)

    def forward(self, x, params, ctx: ExecutionContext):
        return fire_forward(x, self.spec, params, prefix=self.name)

    def backward(self, grad_y, params, cache, ctx: ExecutionContext):
        return fire_backward(self.spec, params, cache, grad_y, prefix=self.name)

    def describe(self) -> str:
        return self.spec.describe()


class DFireLayer(BaseLayer):
    """Module DFire du décodeur"""

    kind = "dfire"

    def __init__(self, name: str, spec: DFireSpec, table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.spec = spec

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        if c != self.spec.in_c:
            raise ShapeError(f"couche {self.name}: {c} canaux en entrée, attendu {self.spec.in_c}")
        return (self.spec.out_c, h, w)

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        return dfire_param_shapes(self.spec)

    def forward(self, x, params, ctx: ExecutionContext):
        return dfire_forward(x, self.spec, params, prefix=self.name)

    def backward(self, grad_y, params, cache, ctx: ExecutionContext):
        return dfire_backward(self.spec, params, cache, grad_y, prefix=self.name)

    def describe(self) -> str:
        return self.spec.describe()

"""
Couches de convolution et de déconvolution (ReLU optionnelle en sortie)
"""

from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from layers.base_layer import BaseLayer, ExecutionContext, Shape
from models.op_types import ConvSpec
from utils.exceptions import ShapeError, SizingError
from utils.nn_ops import (
    conv2d_forward, conv2d_backward, deconv2d_forward, deconv2d_backward,
    conv_output_size, deconv_output_size, relu, relu_backward
)


def conv_relu_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray,
                      spec: ConvSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Convolution suivie d'une ReLU ; renvoie (activation, pré-activation)"""
    pre = conv2d_forward(x, w, b, spec)
    return relu(pre), pre


def conv_relu_backward(x: np.ndarray, w: np.ndarray, spec: ConvSpec, pre: np.ndarray,
                       grad_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return conv2d_backward(x, w, spec, relu_backward(pre, grad_y))


class ConvLayer(BaseLayer):
    """Convolution 2D, poids (out_c, in_c, kh, kw)"""

    kind = "conv"

    def __init__(self, name: str, in_channels: int, spec: ConvSpec, relu: bool = True,
                 table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.in_channels = in_channels
        self.spec = spec
        self.relu = relu

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        if c != self.in_channels:
            raise ShapeError(f"couche {self.name}: {c} canaux en entrée, attendu {self.in_channels}")
        kh, kw = self.spec.kernel
        ho = conv_output_size(h, kh, self.spec.stride, self.spec.pad)
        wo = conv_output_size(w, kw, self.spec.stride, self.spec.pad)
        if ho < 1 or wo < 1:
            raise SizingError(f"sortie {ho}x{wo} pour une entrée {h}x{w}", layer=self.name)
        return (self.spec.out_channels, ho, wo)

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        kh, kw = self.spec.kernel
        return {"w": (self.spec.out_channels, self.in_channels, kh, kw), "b": (self.spec.out_channels,)}

    def forward(self, x: np.ndarray, params: Mapping[str, np.ndarray],
                ctx: ExecutionContext) -> Tuple[np.ndarray, Any]:
        pre = conv2d_forward(x, self.param(params, "w"), self.param(params, "b"), self.spec)
        return (relu(pre) if self.relu else pre), (x, pre)

    def backward(self, grad_y: np.ndarray, params: Mapping[str, np.ndarray], cache: Any,
                 ctx: ExecutionContext) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        x, pre = cache
        if self.relu:
            grad_y = relu_backward(pre, grad_y)
        grad_x, grad_w, grad_b = conv2d_backward(x, self.param(params, "w"), self.spec, grad_y)
        return grad_x, {self.full_name("w"): grad_w, self.full_name("b"): grad_b}

    def describe(self) -> str:
        return self.spec.describe()


class DeconvLayer(BaseLayer):
    """Déconvolution (convolution transposée), poids (in_c, out_c, kh, kw)"""

    kind = "deconv"

    def __init__(self, name: str, in_channels: int, spec: ConvSpec, relu: bool = False,
                 table_row: Optional[str] = None):
        super().__init__(name, table_row)
        self.in_channels = in_channels
        self.spec = spec
        self.relu = relu

    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        c, h, w = in_shape
        if c != self.in_channels:
            raise ShapeError(f"couche {self.name}: {c} canaux en entrée, attendu {self.in_channels}")
        kh, kw = self.spec.kernel
        ho = deconv_output_size(h, kh, self.spec.stride, self.spec.pad)
        wo = deconv_output_size(w, kw, self.spec.stride, self.spec.pad)
        if ho < 1 or wo < 1:
            raise SizingError(f"sortie {ho}x{wo} pour une entrée {h}x{w}", layer=self.name)
        return (self.spec.out_channels, ho, wo)

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        kh, kw = self.spec.kernel
        return {"w": (self.in_channels, self.spec.out_channels, kh, kw), "b": (self.spec.out_channels,)}

    def param_fan_in(self, local_name: str) -> int:
        # chaque sortie reçoit in_c * (k / s)^2 contributions
        kh, kw = self.spec.kernel
        return max(1, round(self.in_channels * kh * kw / self.spec.stride ** 2))

    def forward(self, x: np.ndarray, params: Mapping[str, np.ndarray],
                ctx: ExecutionContext) -> Tuple[np.ndarray, Any]:
        pre = deconv2d_forward(x, self.param(params, "w"), self.param(params, "b"), self.spec)
        return (relu(pre) if self.relu else pre), (x, pre)

    def backward(self, grad_y: np.ndarray, params: Mapping[str, np.ndarray], cache: Any,
                 ctx: ExecutionContext) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        x, pre = cache
        if self.relu:
            grad_y = relu_backward(pre, grad_y)
        grad_x, grad_w, grad_b = deconv2d_backward(x, self.param(params, "w"), self.spec, grad_y)
        return grad_x, {self.full_name("w"): grad_w, self.full_name("b"): grad_b}

    def describe(self) -> str:
        return self.spec.describe()

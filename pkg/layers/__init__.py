"""Layers module"""
from .base_layer import BaseLayer, ExecutionContext
from .conv_layers import ConvLayer, DeconvLayer
from .fire_layers import FireLayer, DFireLayer, fire_forward, fire_backward, dfire_forward, dfire_backward
from .pool_layers import MaxPoolLayer, UnpoolLayer
from .misc_layers import CropLayer, DropoutLayer

__all__ = [
    'BaseLayer', 'ExecutionContext', 'ConvLayer', 'DeconvLayer',
    'FireLayer', 'DFireLayer', 'fire_forward', 'fire_backward', 'dfire_forward', 'dfire_backward',
    'MaxPoolLayer', 'UnpoolLayer', 'CropLayer', 'DropoutLayer'
]

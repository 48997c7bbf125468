"""Arch module"""
from .param_store import ParamStore, init_params
from .network import (
    NetworkPlan, ExecutionCache, build_squeeze_segnet, plan_from_params,
    infer_shapes, count_parameters, net_forward, net_backward, align_logits
)
from .layer_table import layer_table, format_whc

__all__ = [
    'ParamStore', 'init_params', 'NetworkPlan', 'ExecutionCache',
    'build_squeeze_segnet', 'plan_from_params', 'infer_shapes', 'count_parameters',
    'net_forward', 'net_backward', 'align_logits', 'layer_table', 'format_whc'
]

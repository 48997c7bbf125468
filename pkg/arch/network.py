"""
Plan du réseau Squeeze-SegNet : construction, inférence de formes,
comptage des paramètres et exécution avant/arrière
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from arch.param_store import ParamStore, Signature, grads_to_store, param_signature
from config import settings
from layers.base_layer import BaseLayer, ExecutionContext, Shape
from layers.conv_layers import ConvLayer, DeconvLayer
from layers.fire_layers import DFireLayer, FireLayer
from layers.misc_layers import CropLayer, DropoutLayer
from layers.pool_layers import MaxPoolLayer, UnpoolLayer
from models.fire_specs import DFireSpec, FireSpec
from models.op_types import ConvSpec
from models.run_config import WIDTH_DIVISOR_CHOICES
from utils.exceptions import CheckpointError, ShapeError, SizingError
from utils.tensor_core import Rng

logger = logging.getLogger(__name__)


@dataclass
class NetworkPlan:
    """Liste ordonnée de couches et nombre de classes"""
    layers: List[BaseLayer]
    num_classes: int
    input_channels: int = settings.INPUT_CHANNELS
    width_divisor: int = 1

    def __post_init__(self):
        names = [layer.name for layer in self.layers]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ShapeError(f"noms de couches dupliqués: {', '.join(duplicates)}")
        seen_pools = set()
        for layer in self.layers:
            if isinstance(layer, MaxPoolLayer):
                seen_pools.add(layer.name)
            elif isinstance(layer, UnpoolLayer) and layer.pool_name not in seen_pools:
                raise ShapeError(
                    f"{layer.name}: le pooling apparié {layer.pool_name} doit précéder le dépliage"
                )

    def __len__(self) -> int:
        return len(self.layers)

    def layer(self, name: str) -> BaseLayer:
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    @property
    def pool_pairs(self) -> Dict[str, str]:
        """Dépliage -> pooling apparié"""
        return {layer.name: layer.pool_name for layer in self.layers if isinstance(layer, UnpoolLayer)}

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        """Formes de tous les paramètres, noms complets, dans l'ordre du plan"""
        shapes: Dict[str, Tuple[int, ...]] = {}
        for layer in self.layers:
            for local, shape in layer.param_shapes().items():
                shapes[layer.full_name(local)] = shape
        return shapes

    def without_index_sharing(self) -> "NetworkPlan":
        """Variante où chaque dépliage remplit des zéros sans consommer les indices argmax"""
        layers = [
            UnpoolLayer(layer.name, layer.pool_name, share_indices=False, table_row=layer.table_row)
            if isinstance(layer, UnpoolLayer) else layer
            for layer in self.layers
        ]
        return replace(self, layers=layers)


@dataclass
class ExecutionCache:
    """Intermédiaires d'une passe avant, relus par net_backward (réutilisables)"""
    layer_caches: List[Any]
    ctx: ExecutionContext
    signature: Signature
    logits_shape: Tuple[int, ...]


# =============================================================================
# Construction
# =============================================================================

def build_squeeze_segnet(num_classes: int = settings.NUM_CLASSES, width_divisor: int = 1,
                         dropout_rate: float = settings.DROPOUT_RATE,
                         activate_bottleneck: bool = True) -> NetworkPlan:
    """
    Construit le plan encodeur-décodeur complet

    Args:
        num_classes: Nombre de classes K (>= 2), canaux de la déconvolution finale
        width_divisor: Diviseur des largeurs cachées (1 = réseau publié)
        dropout_rate: Taux du dropout après fire9 (0 = désactivé)
        activate_bottleneck: ReLU après conv10 et conv10_D

    Returns:
        NetworkPlan de 28 couches (26 lignes du tableau + dropout et recadrage)
    """
    if num_classes < 2:
        raise ShapeError(f"num_classes doit être >= 2 (reçu {num_classes})")
    if width_divisor not in WIDTH_DIVISOR_CHOICES:
        raise ShapeError(f"width_divisor doit valoir {WIDTH_DIVISOR_CHOICES} (reçu {width_divisor})")

    def ch(channels: int) -> int:
        return max(1, channels // width_divisor)

    def fire(name: str, in_c: int, squeeze: int, expand: int) -> FireLayer:
        spec = FireSpec(ch(in_c), ch(squeeze), ch(expand), ch(expand))
        return FireLayer(name, spec, table_row=name.capitalize())

    def dfire(name: str, in_c: int, expand: int, out_c: int) -> DFireLayer:
        spec = DFireSpec(ch(in_c), ch(expand), ch(expand), ch(out_c))
        return DFireLayer(name, spec, table_row="D" + name[1:].capitalize())

    layers: List[BaseLayer] = [
        ConvLayer("conv1", settings.INPUT_CHANNELS, ConvSpec(ch(96), (7, 7), 2, 0), relu=True),
        MaxPoolLayer("maxpool1"),
        fire("fire2", 96, 16, 64),
        fire("fire3", 128, 16, 64),
        fire("fire4", 128, 32, 128),
        MaxPoolLayer("maxpool4"),
        fire("fire5", 256, 32, 128),
        fire("fire6", 256, 48, 192),
        fire("fire7", 384, 48, 192),
        fire("fire8", 384, 64, 256),
        MaxPoolLayer("maxpool8"),
        fire("fire9", 512, 64, 256),
        DropoutLayer("drop9", dropout_rate, table_row="Fire9"),
        ConvLayer("conv10", ch(512), ConvSpec(ch(1000), (1, 1), 1, 1), relu=activate_bottleneck),
        ConvLayer("conv10_D", ch(1000), ConvSpec(ch(512), (1, 1), 1, 0), relu=activate_bottleneck),
        CropLayer("crop10_D", 1, table_row="conv10_D"),
        dfire("dfire9", 512, 32, 512),
        UnpoolLayer("upsample8", "maxpool8"),
        dfire("dfire8", 512, 32, 384),
        dfire("dfire7", 384, 24, 384),
        dfire("dfire6", 384, 24, 256),
        dfire("dfire5", 256, 24, 256),
        UnpoolLayer("upsample4", "maxpool4"),
        dfire("dfire4", 256, 16, 128),
        dfire("dfire3", 128, 8, 128),
        dfire("dfire2", 128, 8, 96),
        UnpoolLayer("upsample1", "maxpool1"),
        DeconvLayer("conv1_D", ch(96), ConvSpec(num_classes, (10, 10), 2, 1), relu=False),
    ]
    plan = NetworkPlan(layers=layers, num_classes=num_classes, width_divisor=width_divisor)
    logger.debug("plan construit: %d couches, %d classes, diviseur %d", len(plan), num_classes, width_divisor)
    return plan


def plan_from_params(params: Mapping[str, np.ndarray], dropout_rate: float = settings.DROPOUT_RATE,
                     activate_bottleneck: bool = True) -> NetworkPlan:
    """
    Reconstruit le plan (classes, diviseur de largeur) à partir des formes des paramètres

    Raises:
        CheckpointError: paramètres ne correspondant à aucun plan constructible
    """
    if "conv1.w" not in params or "conv1_D.b" not in params:
        raise CheckpointError("paramètres conv1.w ou conv1_D.b absents")
    num_classes = int(params["conv1_D.b"].shape[0])
    conv1_width = int(params["conv1.w"].shape[0])
    divisors = [d for d in WIDTH_DIVISOR_CHOICES if max(1, 96 // d) == conv1_width]
    if not divisors or num_classes < 2:
        raise CheckpointError(f"aucun plan pour conv1 x{conv1_width} et {num_classes} classes")
    plan = build_squeeze_segnet(num_classes, divisors[0], dropout_rate, activate_bottleneck)
    try:
        ParamStore(params).validate_against(plan)
    except ShapeError as exc:
        raise CheckpointError(f"paramètres incompatibles avec le plan: {exc}") from exc
    return plan


# =============================================================================
# Formes et paramètres
# =============================================================================

def infer_shapes(plan: NetworkPlan, input_hwc: Tuple[int, int, int]) -> List[Tuple[str, Shape]]:
    """
    Inférence de formes couche par couche

    Args:
        plan: Plan du réseau
        input_hwc: (h, w, c) de l'entrée

    Returns:
        Liste ordonnée (nom de couche, (c, h, w) en sortie)

    Raises:
        SizingError: taille dégénérée, nomme la couche
        ShapeError: canaux incompatibles
    """
    h, w, c = input_hwc
    if c != plan.input_channels:
        raise ShapeError(f"entrée à {c} canaux, le plan en attend {plan.input_channels}")
    if h < 1 or w < 1:
        raise SizingError(f"entrée {w}x{h} dégénérée")
    shape: Shape = (c, h, w)
    pool_dims: Dict[str, Any] = {}
    shapes = []
    for layer in plan.layers:
        shape = layer.output_shape(shape, pool_dims)
        shapes.append((layer.name, shape))
    return shapes


def count_parameters(plan: NetworkPlan) -> Tuple[Dict[str, int], int]:
    """
    Returns:
        (nombre de paramètres par couche, total)
    """
    per_layer = {layer.name: layer.count_parameters() for layer in plan.layers}
    return per_layer, sum(per_layer.values())


def minimum_input_size(plan: NetworkPlan, limit: int = 512) -> Optional[int]:
    """Plus petit côté carré admis par le plan (None au-delà de limit)"""
    for side in range(1, limit + 1):
        try:
            infer_shapes(plan, (side, side, plan.input_channels))
            return side
        except SizingError:
            continue
    return None


# =============================================================================
# Exécution
# =============================================================================

def net_forward(plan: NetworkPlan, params: Mapping[str, np.ndarray], x: np.ndarray,
                training: bool = False, rng: Optional[Rng] = None) -> Tuple[np.ndarray, ExecutionCache]:
    """
    Passe avant complète

    Args:
        plan: Plan du réseau
        params: Paramètres (noms complets)
        x: Entrée (n, c, h, w)
        training: Active le dropout
        rng: Générateur du dropout (défaut: graine du projet)

    Returns:
        (logits, ExecutionCache)
    """
    if x.ndim != 4 or x.shape[1] != plan.input_channels:
        raise ShapeError(f"entrée {x.shape}, attendu (n, {plan.input_channels}, h, w)")
    if training and rng is None:
        rng = Rng(settings.SEED)
    ctx = ExecutionContext(training=training, rng=rng)
    caches = []
    for layer in plan.layers:
        try:
            x, cache = layer.forward(x, params, ctx)
        except SizingError as exc:
            if exc.layer is None:
                raise SizingError(str(exc), layer=layer.name) from exc
            raise
        caches.append(cache)
    execution = ExecutionCache(
        layer_caches=caches, ctx=ctx, signature=param_signature(params), logits_shape=tuple(x.shape)
    )
    return x, execution


def net_backward(plan: NetworkPlan, params: Mapping[str, np.ndarray], cache: ExecutionCache,
                 grad_logits: np.ndarray) -> ParamStore:
    """
    Rétropropagation complète

    Returns:
        ParamStore des gradients, même disposition que params

    Raises:
        ShapeError: cache produit avec d'autres paramètres ou gradient mal formé
    """
    if cache.signature != param_signature(params):
        raise ShapeError("cache d'exécution incompatible avec les paramètres fournis")
    if len(cache.layer_caches) != len(plan.layers):
        raise ShapeError("cache d'exécution produit par un autre plan")
    if tuple(grad_logits.shape) != cache.logits_shape:
        raise ShapeError(f"gradient {grad_logits.shape}, logits {cache.logits_shape}")
    grads: Dict[str, np.ndarray] = {}
    grad = grad_logits
    for layer, layer_cache in zip(reversed(plan.layers), reversed(cache.layer_caches)):
        grad, layer_grads = layer.backward(grad, params, layer_cache, cache.ctx)
        grads.update(layer_grads)
    return grads_to_store(grads, params.keys())


def align_logits(logits: np.ndarray, target_hw: Tuple[int, int]) -> np.ndarray:
    """
    Recadre les logits en bas et à droite sur la taille de l'entrée
    (un côté impair d'entrée produit une ligne ou colonne supplémentaire)
    """
    h, w = target_hw
    if logits.shape[2] < h or logits.shape[3] < w:
        raise ShapeError(f"logits {logits.shape[2:]} plus petits que l'entrée {(h, w)}")
    return logits[:, :, :h, :w]


def align_logits_backward(grad: np.ndarray, full_shape: Tuple[int, ...]) -> np.ndarray:
    h, w = grad.shape[2:]
    pad_h, pad_w = full_shape[2] - h, full_shape[3] - w
    if pad_h == 0 and pad_w == 0:
        return grad
    return np.pad(grad, ((0, 0), (0, 0), (0, pad_h), (0, pad_w)))

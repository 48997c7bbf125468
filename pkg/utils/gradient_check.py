"""
Vérification des passes arrière par différences finies centrées (float64)

Chaque vérification réduit la sortie à un scalaire par projection sur un
tenseur aléatoire u : f = <forward(x), u>, dont le gradient analytique est
backward(u). L'erreur relative est ||a - n|| / (||a|| + ||n||).

Les fonctions de passe arrière sont injectables pour tester le harnais lui-même.
"""

import logging
from dataclasses import dataclass, asdict
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from arch.network import align_logits, build_squeeze_segnet, net_backward, net_forward
from arch.param_store import init_params
from config import settings
from layers.fire_layers import (
    dfire_backward, dfire_forward, dfire_param_shapes, fire_backward, fire_forward, fire_param_shapes
)
from models.fire_specs import DFireSpec, FireSpec
from models.op_types import ConvSpec
from utils.nn_ops import (
    conv2d_backward, conv2d_forward, crop_center, crop_center_backward, deconv2d_backward,
    deconv2d_forward, dropout, dropout_backward, max_unpool, max_unpool_backward, maxpool_backward,
    maxpool_forward, relu, relu_backward, softmax_cross_entropy
)
from utils.tensor_core import Rng

logger = logging.getLogger(__name__)

EPSILON = 1e-6
NETWORK_TOLERANCE_FACTOR = settings.GRADCHECK_NETWORK_TOLERANCE / settings.GRADCHECK_TOLERANCE


@dataclass
class CheckResult:
    """Résultat d'une vérification"""
    name: str
    seed: int
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error)) and self.error <= self.tolerance

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """||a - n|| / (||a|| + ||n||), 0 quand les deux sont nuls"""
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def numerical_gradient(f: Callable[[], float], array: np.ndarray,
                       indices: Optional[Sequence[int]] = None, eps: float = EPSILON) -> np.ndarray:
    """
    Différences centrées de f par rapport aux éléments de array (modifié puis restauré en place)

    Args:
        f: Scalaire recalculé à chaque appel
        array: Tableau contigu perturbé
        indices: Indices plats à perturber (défaut: tous)
    """
    flat = array.reshape(-1)
    if not np.shares_memory(flat, array):
        raise ValueError("numerical_gradient: tableau non contigu")
    positions = range(array.size) if indices is None else indices
    grad = np.zeros(len(positions))
    for j, i in enumerate(positions):
        original = flat[i]
        flat[i] = original + eps
        f_plus = f()
        flat[i] = original - eps
        f_minus = f()
        flat[i] = original
        grad[j] = (f_plus - f_minus) / (2 * eps)
    return grad


def _normal(rng: Rng, shape) -> np.ndarray:
    return rng.normal(int(np.prod(shape))).reshape(shape)


def _distinct(rng: Rng, shape) -> np.ndarray:
    """Valeurs deux à deux éloignées (pas d'égalité sous perturbation)"""
    count = int(np.prod(shape))
    order = np.argsort(rng.uniform(count), kind="stable")
    return (order * 0.1 + rng.uniform(count) * 0.01).reshape(shape)


def _away_from_zero(rng: Rng, shape) -> np.ndarray:
    signs = np.where(rng.uniform(int(np.prod(shape))) < 0.5, -1.0, 1.0).reshape(shape)
    return signs * (0.1 + rng.uniform(int(np.prod(shape))).reshape(shape))


def _project(y: np.ndarray, u: np.ndarray) -> float:
    return float(np.sum(y * u))


# =============================================================================
# Vérifications par opération
# =============================================================================

def check_conv2d(seed: int, tolerance: float, backward: Callable = conv2d_backward) -> CheckResult:
    rng = Rng(seed).derive(1)
    spec = ConvSpec(3, (3, 3), stride=2, pad=1)
    x, w, b = _normal(rng, (1, 2, 5, 5)), _normal(rng, (3, 2, 3, 3)), _normal(rng, (3,))
    u = _normal(rng, conv2d_forward(x, w, b, spec).shape)

    def f() -> float:
        return _project(conv2d_forward(x, w, b, spec), u)

    gx, gw, gb = backward(x, w, spec, u)
    analytic = np.concatenate([gx.ravel(), gw.ravel(), gb.ravel()])
    numeric = np.concatenate([numerical_gradient(f, x), numerical_gradient(f, w), numerical_gradient(f, b)])
    return CheckResult("conv2d", seed, relative_error(analytic, numeric), tolerance)


def check_deconv2d(seed: int, tolerance: float, backward: Callable = deconv2d_backward) -> CheckResult:
    rng = Rng(seed).derive(2)
    spec = ConvSpec(3, (4, 4), stride=2, pad=1)
    x, w, b = _normal(rng, (1, 2, 3, 3)), _normal(rng, (2, 3, 4, 4)), _normal(rng, (3,))
    u = _normal(rng, deconv2d_forward(x, w, b, spec).shape)

    def f() -> float:
        return _project(deconv2d_forward(x, w, b, spec), u)

    gx, gw, gb = backward(x, w, spec, u)
    analytic = np.concatenate([gx.ravel(), gw.ravel(), gb.ravel()])
    numeric = np.concatenate([numerical_gradient(f, x), numerical_gradient(f, w), numerical_gradient(f, b)])
    return CheckResult("deconv2d", seed, relative_error(analytic, numeric), tolerance)


def check_maxpool(seed: int, tolerance: float, backward: Callable = maxpool_backward) -> CheckResult:
    rng = Rng(seed).derive(3)
    x = _distinct(rng, (1, 2, 6, 6))
    y, record = maxpool_forward(x)
    u = _normal(rng, y.shape)

    def f() -> float:
        return _project(maxpool_forward(x)[0], u)

    analytic = backward(record, u)
    return CheckResult("maxpool", seed, relative_error(analytic, numerical_gradient(f, x)), tolerance)


def check_max_unpool(seed: int, tolerance: float, backward: Callable = max_unpool_backward) -> CheckResult:
    rng = Rng(seed).derive(4)
    pooled, record = maxpool_forward(_distinct(rng, (1, 2, 7, 6)))
    x = _normal(rng, pooled.shape)
    u = _normal(rng, (1, 2, 7, 6))

    def f() -> float:
        return _project(max_unpool(x, record), u)

    analytic = backward(record, u)
    return CheckResult("max_unpool", seed, relative_error(analytic, numerical_gradient(f, x)), tolerance)


def check_relu(seed: int, tolerance: float, backward: Callable = relu_backward) -> CheckResult:
    rng = Rng(seed).derive(5)
    x = _away_from_zero(rng, (1, 3, 4, 4))
    u = _normal(rng, x.shape)

    def f() -> float:
        return _project(relu(x), u)

    analytic = backward(x, u)
    return CheckResult("relu", seed, relative_error(analytic, numerical_gradient(f, x)), tolerance)


def check_crop_center(seed: int, tolerance: float, backward: Callable = crop_center_backward) -> CheckResult:
    rng = Rng(seed).derive(6)
    x = _normal(rng, (1, 2, 5, 6))
    u = _normal(rng, (1, 2, 3, 4))

    def f() -> float:
        return _project(crop_center(x, 1), u)

    analytic = backward(u, 1)
    return CheckResult("crop_center", seed, relative_error(analytic, numerical_gradient(f, x)), tolerance)


def check_dropout(seed: int, tolerance: float, backward: Callable = dropout_backward) -> CheckResult:
    rng = Rng(seed).derive(7)
    x = _normal(rng, (1, 2, 4, 4))
    u = _normal(rng, x.shape)
    mask_seed = seed + 1

    def f() -> float:
        return _project(dropout(x, 0.5, Rng(mask_seed), True)[0], u)

    _, mask = dropout(x, 0.5, Rng(mask_seed), True)
    analytic = backward(mask, u)
    return CheckResult("dropout", seed, relative_error(analytic, numerical_gradient(f, x)), tolerance)


def _loss_gradient(logits, labels, weights, ignore_id):
    return softmax_cross_entropy(logits, labels, weights, ignore_id).grad_logits


def check_softmax_cross_entropy(seed: int, tolerance: float,
                                backward: Callable = _loss_gradient) -> CheckResult:
    rng = Rng(seed).derive(8)
    num_classes = 3
    logits = _normal(rng, (1, num_classes, 1, 2))
    labels = rng.integers(num_classes, 2).reshape(1, 1, 2)
    weights = 0.5 + rng.uniform(num_classes)

    def f() -> float:
        return softmax_cross_entropy(logits, labels, weights, settings.IGNORE_ID).loss

    analytic = backward(logits, labels, weights, settings.IGNORE_ID)
    return CheckResult("softmax_cross_entropy", seed,
                       relative_error(analytic, numerical_gradient(f, logits)), tolerance)


def _module_params(rng: Rng, shapes: Mapping[str, tuple], prefix: str) -> Dict[str, np.ndarray]:
    return {f"{prefix}.{local}": _normal(rng, shape) * 0.5 for local, shape in shapes.items()}


def check_fire(seed: int, tolerance: float, backward: Callable = fire_backward) -> CheckResult:
    rng = Rng(seed).derive(9)
    spec = FireSpec(in_c=4, squeeze_c=3, expand1_c=2, expand3_c=3)
    params = _module_params(rng, fire_param_shapes(spec), "fire")
    x = _normal(rng, (1, 4, 4, 5))
    y, cache = fire_forward(x, spec, params)
    u = _normal(rng, y.shape)

    def f() -> float:
        return _project(fire_forward(x, spec, params)[0], u)

    gx, grads = backward(spec, params, cache, u)
    analytic = np.concatenate([gx.ravel()] + [grads[name].ravel() for name in params])
    numeric = np.concatenate([numerical_gradient(f, x)] + [numerical_gradient(f, params[name]) for name in params])
    return CheckResult("fire", seed, relative_error(analytic, numeric), tolerance)


def check_dfire(seed: int, tolerance: float, backward: Callable = dfire_backward) -> CheckResult:
    rng = Rng(seed).derive(10)
    spec = DFireSpec(in_c=4, expand1_c=2, expand3_c=3, squeeze_out_c=3)
    params = _module_params(rng, dfire_param_shapes(spec), "dfire")
    x = _normal(rng, (1, 4, 4, 5))
    y, cache = dfire_forward(x, spec, params)
    u = _normal(rng, y.shape)

    def f() -> float:
        return _project(dfire_forward(x, spec, params)[0], u)

    gx, grads = backward(spec, params, cache, u)
    analytic = np.concatenate([gx.ravel()] + [grads[name].ravel() for name in params])
    numeric = np.concatenate([numerical_gradient(f, x)] + [numerical_gradient(f, params[name]) for name in params])
    return CheckResult("dfire", seed, relative_error(analytic, numeric), tolerance)


OP_CHECKS: Dict[str, Callable[..., CheckResult]] = {
    "conv2d": check_conv2d,
    "deconv2d": check_deconv2d,
    "maxpool": check_maxpool,
    "max_unpool": check_max_unpool,
    "relu": check_relu,
    "crop_center": check_crop_center,
    "dropout": check_dropout,
    "softmax_cross_entropy": check_softmax_cross_entropy,
    "fire": check_fire,
    "dfire": check_dfire,
}


# =============================================================================
# Vérification du réseau complet
# =============================================================================

def check_network(seed: int, tolerance: float, backward: Callable = net_backward,
                  num_classes: int = 3, width_divisor: int = settings.GRADCHECK_NETWORK_DIVISOR,
                  input_hw=settings.GRADCHECK_NETWORK_INPUT,
                  samples: int = settings.GRADCHECK_NETWORK_SAMPLES) -> CheckResult:
    """
    Dérivée directionnelle de la perte par rapport à des paramètres tirés au hasard,
    réseau à largeur réduite, dropout actif avec un masque fixe
    """
    rng = Rng(seed).derive(11)
    plan = build_squeeze_segnet(num_classes, width_divisor=width_divisor)
    params = init_params(plan, rng.derive(0)).astype(np.float64)
    for name in params:
        if name.endswith(".b"):
            params[name] += 0.01 * _normal(rng, params[name].shape)
    h, w = input_hw
    x = rng.uniform(3 * h * w).reshape(1, 3, h, w)
    labels = rng.integers(num_classes, h * w).reshape(1, h, w)
    weights = np.ones(num_classes)
    dropout_seed = seed + 101

    def loss_and_cache():
        logits, cache = net_forward(plan, params, x, training=True, rng=Rng(dropout_seed))
        result = softmax_cross_entropy(align_logits(logits, (h, w)), labels, weights, settings.IGNORE_ID)
        return logits, cache, result

    def f() -> float:
        return loss_and_cache()[2].loss

    logits, cache, result = loss_and_cache()
    grad_logits = np.zeros_like(logits)
    grad_logits[:, :, :h, :w] = result.grad_logits
    grads = backward(plan, params, cache, grad_logits)

    names = list(params)
    picks = rng.integers(len(names), samples)
    analytic, numeric = [], []
    for pick in picks:
        name = names[int(pick)]
        index = int(rng.integers(params[name].size, 1)[0])
        analytic.append(grads[name].reshape(-1)[index])
        numeric.append(numerical_gradient(f, params[name], [index])[0])
    return CheckResult("network", seed, relative_error(np.array(analytic), np.array(numeric)), tolerance)


def run_gradient_suite(seeds: Sequence[int] = tuple(settings.GRADCHECK_SEEDS),
                       tolerance: float = settings.GRADCHECK_TOLERANCE,
                       network_tolerance: Optional[float] = None,
                       include_network: bool = True,
                       backward_overrides: Optional[Mapping[str, Callable]] = None) -> List[CheckResult]:
    """
    Exécute toutes les vérifications pour chaque graine

    Args:
        seeds: Graines
        tolerance: Erreur relative maximale par opération
        network_tolerance: Erreur maximale du réseau complet (défaut: tolerance x 10)
        include_network: Inclut la vérification du réseau complet
        backward_overrides: Passes arrière de remplacement par nom d'opération

    Returns:
        Liste de CheckResult (une par opération et par graine)
    """
    overrides = dict(backward_overrides or {})
    if network_tolerance is None:
        network_tolerance = tolerance * NETWORK_TOLERANCE_FACTOR
    results = []
    for seed in seeds:
        for name, check in OP_CHECKS.items():
            kwargs = {"backward": overrides[name]} if name in overrides else {}
            result = check(seed, tolerance, **kwargs)
            logger.debug("%s graine %d: erreur %.3e", name, seed, result.error)
            results.append(result)
        if include_network:
            kwargs = {"backward": overrides["network"]} if "network" in overrides else {}
            result = check_network(seed, network_tolerance, **kwargs)
            logger.debug("network graine %d: erreur %.3e", seed, result.error)
            results.append(result)
    return results

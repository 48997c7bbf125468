"""
Descente de gradient stochastique avec moment et régularisation L2
"""

from typing import Optional, Tuple

from arch.param_store import ParamStore, is_bias
from models.sgd_config import SgdConfig
from utils.exceptions import ShapeError


def init_velocity(params: ParamStore) -> ParamStore:
    return params.zeros_like()


def sgd_step(params: ParamStore, grads: ParamStore, velocity: ParamStore, cfg: SgdConfig,
             learning_rate: Optional[float] = None) -> Tuple[ParamStore, ParamStore]:
    """
    Mise à jour en place :
        v <- momentum * v - lr * (g + weight_decay * p)
        p <- p + v
    Les biais sont exclus de la régularisation.

    Args:
        params: Paramètres (modifiés en place)
        grads: Gradients
        velocity: Vitesses (modifiées en place)
        cfg: Hyperparamètres
        learning_rate: Taux courant (défaut: cfg.learning_rate)

    Returns:
        (params, velocity)

    Raises:
        ShapeError: noms ou formes différents
    """
    if set(params) != set(grads) or set(params) != set(velocity):
        raise ShapeError("params, gradients et vitesses doivent avoir les mêmes noms")
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    for name, p in params.items():
        g, v = grads[name], velocity[name]
        if g.shape != p.shape or v.shape != p.shape:
            raise ShapeError(f"{name}: formes {p.shape}, {g.shape}, {v.shape}")
        step = g if is_bias(name) or cfg.weight_decay == 0 else g + cfg.weight_decay * p
        v *= p.dtype.type(cfg.momentum)
        v -= p.dtype.type(lr) * step.astype(p.dtype, copy=False)
        p += v
    return params, velocity

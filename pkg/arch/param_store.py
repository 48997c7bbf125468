"""
Stockage nommé des paramètres (poids et biais) et initialisation déterministe
"""

from typing import Dict, Mapping, Tuple, TYPE_CHECKING

import numpy as np

from utils.exceptions import ShapeError
from utils.tensor_core import DTYPE, Rng, he_init

if TYPE_CHECKING:
    from arch.network import NetworkPlan


Signature = Tuple[Tuple[str, Tuple[int, ...]], ...]


def param_signature(params: Mapping[str, np.ndarray]) -> Signature:
    """Noms et formes, triés par nom"""
    return tuple(sorted((name, tuple(value.shape)) for name, value in params.items()))


class ParamStore(dict):
    """
    Dictionnaire nom complet -> tenseur (ex: conv1.w, fire2.squeeze.b)

    L'ordre d'insertion suit l'ordre du plan ; c'est aussi l'ordre des
    enregistrements du checkpoint.
    """

    def zeros_like(self) -> "ParamStore":
        return ParamStore((name, np.zeros_like(value)) for name, value in self.items())

    def copy(self) -> "ParamStore":
        """Copie profonde (les tableaux sont dupliqués)"""
        return ParamStore((name, value.copy()) for name, value in self.items())

    def astype(self, dtype) -> "ParamStore":
        return ParamStore((name, value.astype(dtype)) for name, value in self.items())

    def total_size(self) -> int:
        """Nombre total de scalaires"""
        return int(sum(value.size for value in self.values()))

    def signature(self) -> Signature:
        return param_signature(self)

    def validate_against(self, plan: "NetworkPlan") -> None:
        """
        Vérifie que chaque paramètre du plan est présent avec la forme attendue

        Raises:
            ShapeError: paramètre manquant, en trop ou de mauvaise forme
        """
        expected = plan.param_shapes()
        missing = [name for name in expected if name not in self]
        if missing:
            raise ShapeError(f"paramètres manquants: {', '.join(missing[:5])}")
        extra = [name for name in self if name not in expected]
        if extra:
            raise ShapeError(f"paramètres inconnus du plan: {', '.join(extra[:5])}")
        for name, shape in expected.items():
            if tuple(self[name].shape) != tuple(shape):
                raise ShapeError(f"{name}: forme {tuple(self[name].shape)}, attendu {tuple(shape)}")


def init_params(plan: "NetworkPlan", rng: Rng, dtype=DTYPE) -> ParamStore:
    """
    Initialise les paramètres du plan : poids He (N(0, 2 / fan_in)), biais nuls

    Chaque poids est tiré d'un sous-générateur dérivé de (indice de couche,
    indice de paramètre), si bien que le tirage ne dépend pas des autres couches.

    Args:
        plan: Plan du réseau
        rng: Générateur racine
        dtype: Type de stockage (float32 par défaut)

    Returns:
        ParamStore dans l'ordre du plan
    """
    params = ParamStore()
    for layer_index, layer in enumerate(plan.layers):
        for param_index, (local, shape) in enumerate(layer.param_shapes().items()):
            name = layer.full_name(local)
            if local == "b" or local.endswith(".b"):
                params[name] = np.zeros(shape, dtype=dtype)
            else:
                sub_rng = rng.derive(layer_index, param_index)
                params[name] = he_init(shape, layer.param_fan_in(local), sub_rng, dtype=dtype)
    return params


def is_bias(name: str) -> bool:
    return name.endswith(".b")


def grads_to_store(grads: Dict[str, np.ndarray], order) -> ParamStore:
    """Réordonne un dictionnaire de gradients selon l'ordre des paramètres"""
    return ParamStore((name, grads[name]) for name in order)

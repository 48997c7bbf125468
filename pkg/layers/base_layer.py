"""
Classe abstraite de base pour toutes les couches du réseau
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from models.op_types import PoolRecord
from utils.tensor_core import Rng

Shape = Tuple[int, int, int]  # (c, h, w)


@dataclass
class ExecutionContext:
    """État partagé par les couches pendant une passe : mode, générateur, indices de pooling"""
    training: bool = False
    rng: Optional[Rng] = None
    pool_records: Dict[str, PoolRecord] = field(default_factory=dict)


class BaseLayer(ABC):
    """
    Interface commune à toutes les couches.
    Chaque couche implémente : output_shape, forward, backward
    (et param_shapes si elle porte des paramètres)
    """

    kind: str = ""

    def __init__(self, name: str, table_row: Optional[str] = None):
        """
        Args:
            name: Nom unique dans le plan, préfixe des paramètres (ex: fire2)
            table_row: Ligne du tableau de couches à laquelle la couche est rattachée
        """
        self.name = name
        self.table_row = table_row or name

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"

    @abstractmethod
    def output_shape(self, in_shape: Shape, pool_dims: Dict[str, Any]) -> Shape:
        """
        Inférence de forme

        Args:
            in_shape: (c, h, w) en entrée
            pool_dims: Dimensions enregistrées par les pooling précédents (lecture/écriture)

        Returns:
            (c, h, w) en sortie

        Raises:
            SizingError: taille dégénérée (nomme la couche)
        """
        raise NotImplementedError("Chaque couche doit implémenter output_shape")

    @abstractmethod
    def forward(self, x: np.ndarray, params: Mapping[str, np.ndarray],
                ctx: ExecutionContext) -> Tuple[np.ndarray, Any]:
        """
        Passe avant

        Returns:
            (sortie, cache nécessaire à la passe arrière)
        """
        raise NotImplementedError("Chaque couche doit implémenter forward")

    @abstractmethod
    def backward(self, grad_y: np.ndarray, params: Mapping[str, np.ndarray], cache: Any,
                 ctx: ExecutionContext) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        """
        Passe arrière

        Returns:
            (gradient de l'entrée, gradients des paramètres par nom complet)
        """
        raise NotImplementedError("Chaque couche doit implémenter backward")

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        """Formes des paramètres, noms locaux (ex: squeeze.w)"""
        return {}

    def param_fan_in(self, local_name: str) -> int:
        """Nombre d'entrées par sortie pour l'initialisation (poids (out, in, kh, kw))"""
        shape = self.param_shapes()[local_name]
        return int(np.prod(shape[1:]))

    def full_name(self, local_name: str) -> str:
        return f"{self.name}.{local_name}"

    def param(self, params: Mapping[str, np.ndarray], local_name: str) -> np.ndarray:
        return params[self.full_name(local_name)]

    def count_parameters(self) -> int:
        return int(sum(np.prod(shape) for shape in self.param_shapes().values()))

    def describe(self) -> str:
        """Colonne « taille du filtre » du tableau de couches"""
        return ""

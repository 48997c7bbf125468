"""
Modèle de configuration de la descente de gradient
"""

from dataclasses import dataclass, asdict
from typing import Dict

from config import settings
from utils.exceptions import ConfigError


@dataclass
class SgdConfig:
    """Hyperparamètres SGD (batch de 4 et 44000 itérations par défaut)"""
    learning_rate: float = settings.LEARNING_RATE
    momentum: float = settings.MOMENTUM
    weight_decay: float = settings.WEIGHT_DECAY
    batch_size: int = settings.BATCH_SIZE
    max_iterations: int = settings.MAX_ITERATIONS
    lr_drop_factor: float = settings.LR_DROP_FACTOR
    lr_drop_every: int = settings.LR_DROP_EVERY
    seed: int = settings.SEED

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Vérifie les invariants

        Raises:
            ConfigError: valeur hors domaine
        """
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate doit être > 0 (reçu {self.learning_rate})")
        if not 0 <= self.momentum < 1:
            raise ConfigError(f"momentum doit être dans [0, 1) (reçu {self.momentum})")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay doit être >= 0 (reçu {self.weight_decay})")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size doit être >= 1 (reçu {self.batch_size})")
        if self.max_iterations < 0:
            raise ConfigError(f"max_iterations doit être >= 0 (reçu {self.max_iterations})")
        if self.lr_drop_every < 1 or self.lr_drop_factor <= 0:
            raise ConfigError("lr_drop_every doit être >= 1 et lr_drop_factor > 0")

    def learning_rate_at(self, iteration: int) -> float:
        """Taux d'apprentissage à l'itération (base 0), décroissance par paliers"""
        return self.learning_rate * self.lr_drop_factor ** (iteration // self.lr_drop_every)

    def to_dict(self) -> Dict:
        return asdict(self)

"""
Configuration d'exécution de la ligne de commande
Fichier texte plat `clé = valeur` ; les options de ligne de commande priment
"""

from dataclasses import dataclass, fields, asdict
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values

from config import settings
from models.sgd_config import SgdConfig
from utils.exceptions import ConfigError

_BOOL_TRUE = {"1", "true", "yes", "on", "oui"}
_BOOL_FALSE = {"0", "false", "no", "off", "non"}
CLASS_WEIGHTING_CHOICES = ("median_frequency", "none")
# puissances de deux : les canaux divisés restent appariés entre pooling et dépliage
WIDTH_DIVISOR_CHOICES = (1, 2, 4, 8, 16)


@dataclass
class RunConfig:
    """Tous les paramètres d'une commande, avec leurs valeurs par défaut documentées"""
    dataset_dir: str = settings.DATASET_DIR
    palette_path: str = settings.PALETTE_PATH
    output_dir: str = str(settings.OUTPUT_DIR)
    checkpoint: str = ""
    learning_rate: float = settings.LEARNING_RATE
    momentum: float = settings.MOMENTUM
    weight_decay: float = settings.WEIGHT_DECAY
    batch_size: int = settings.BATCH_SIZE
    max_iterations: int = settings.MAX_ITERATIONS
    lr_drop_factor: float = settings.LR_DROP_FACTOR
    lr_drop_every: int = settings.LR_DROP_EVERY
    checkpoint_every: int = settings.CHECKPOINT_EVERY
    log_every: int = settings.LOG_EVERY
    num_classes: int = settings.NUM_CLASSES
    seed: int = settings.SEED
    sequential: bool = False
    dropout_rate: float = settings.DROPOUT_RATE
    class_weighting: str = settings.CLASS_WEIGHTING
    width_divisor: int = 1
    synthetic_count: int = settings.SYNTHETIC_COUNT
    synthetic_height: int = settings.SYNTHETIC_HEIGHT
    synthetic_width: int = settings.SYNTHETIC_WIDTH
    synthetic_noise: float = settings.SYNTHETIC_NOISE

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> "RunConfig":
        """
        Construit la configuration : défauts, puis fichier, puis options

        Args:
            path: Fichier `clé = valeur` (optionnel)
            overrides: Valeurs de la ligne de commande (None = non fournie)

        Returns:
            RunConfig validée

        Raises:
            ConfigError: fichier absent, clé inconnue ou valeur invalide
        """
        values: Dict[str, Any] = {}
        if path:
            if not Path(path).is_file():
                raise ConfigError(f"fichier de configuration introuvable: {path}")
            values.update({k.strip(): v for k, v in dotenv_values(path).items()})
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value

        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise ConfigError(f"clé(s) inconnue(s): {', '.join(unknown)}")

        kwargs = {key: _convert(key, raw, known[key].type) for key, raw in values.items()}
        config = cls(**kwargs)
        config.validate()
        return config

    def validate(self, require_paths: bool = True) -> None:
        """
        Vérifie les invariants numériques et l'existence des chemins référencés

        Raises:
            ConfigError: premier problème rencontré
        """
        self.sgd_config()
        if self.num_classes < 2:
            raise ConfigError(f"num_classes doit être >= 2 (reçu {self.num_classes})")
        if not 0 <= self.dropout_rate < 1:
            raise ConfigError(f"dropout_rate doit être dans [0, 1) (reçu {self.dropout_rate})")
        if self.class_weighting not in CLASS_WEIGHTING_CHOICES:
            raise ConfigError(
                f"class_weighting doit valoir {' ou '.join(CLASS_WEIGHTING_CHOICES)}"
            )
        if self.width_divisor < 1 or self.synthetic_count < 1 or self.log_every < 1:
            raise ConfigError("width_divisor, synthetic_count et log_every doivent être >= 1")
        if self.width_divisor not in WIDTH_DIVISOR_CHOICES:
            raise ConfigError(
                f"width_divisor doit valoir {', '.join(map(str, WIDTH_DIVISOR_CHOICES))} "
                f"(reçu {self.width_divisor})"
            )
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every doit être >= 0")
        if self.synthetic_noise < 0:
            raise ConfigError("synthetic_noise doit être >= 0")
        if require_paths:
            if self.dataset_dir and not Path(self.dataset_dir).is_dir():
                raise ConfigError(f"répertoire de données introuvable: {self.dataset_dir}")
            if self.palette_path and not Path(self.palette_path).is_file():
                raise ConfigError(f"palette introuvable: {self.palette_path}")
            if self.checkpoint and not Path(self.checkpoint).is_file():
                raise ConfigError(f"checkpoint introuvable: {self.checkpoint}")

    def sgd_config(self) -> SgdConfig:
        """Extrait la configuration SGD (valide ses invariants)"""
        return SgdConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            batch_size=self.batch_size,
            max_iterations=self.max_iterations,
            lr_drop_factor=self.lr_drop_factor,
            lr_drop_every=self.lr_drop_every,
            seed=self.seed,
        )

    def to_dict(self) -> Dict:
        return asdict(self)


def _convert(key: str, raw: Any, type_name: Any) -> Any:
    """Convertit une valeur texte vers le type du champ"""
    type_name = getattr(type_name, "__name__", type_name)
    if raw is None:
        # clé sans `=` dans le fichier
        raise ConfigError(f"valeur manquante pour {key}")
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if type_name == "bool":
            lowered = text.lower()
            if lowered in _BOOL_TRUE:
                return True
            if lowered in _BOOL_FALSE:
                return False
            raise ValueError(text)
        if type_name == "int":
            return int(text)
        if type_name == "float":
            return float(text)
    except ValueError:
        raise ConfigError(f"valeur invalide pour {key}: {raw!r}") from None
    return text

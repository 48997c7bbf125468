"""
Hiérarchie d'erreurs du toolkit
"""

from typing import Optional


class SqueezeSegError(Exception):
    """Erreur de base du toolkit"""


class ShapeError(SqueezeSegError, ValueError):
    """Dimensions incompatibles entre tenseurs ou avec une spécification"""


class SizingError(ShapeError):
    """Taille spatiale dégénérée pendant l'inférence de formes"""

    def __init__(self, message: str, layer: Optional[str] = None):
        self.layer = layer
        if layer:
            message = f"couche {layer}: {message}"
        super().__init__(message)


class DataError(SqueezeSegError, ValueError):
    """Donnée invalide (étiquette hors plage, jeu vide...)"""


class FormatError(DataError):
    """Fichier mal formé, avec position en octets"""

    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        self.offset = offset
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(f"{where}{message} (octet {offset})")


class CheckpointError(SqueezeSegError):
    """Checkpoint illisible ou incohérent"""


class ConfigError(SqueezeSegError, ValueError):
    """Configuration d'exécution invalide"""


class NumericError(SqueezeSegError, ArithmeticError):
    """Valeur non finie rencontrée pendant l'entraînement"""

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"itération {iteration}: {message}"
        super().__init__(message)

"""
Modèles de données pour les échantillons étiquetés et la palette de classes
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from utils.exceptions import DataError


@dataclass
class Sample:
    """Image (1, 3, h, w) dans [0, 1] et carte d'étiquettes (h, w)"""
    image: np.ndarray
    labels: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.image.ndim != 4 or self.image.shape[0] != 1:
            raise DataError(f"{self.name}: image de forme {self.image.shape}, attendu (1, c, h, w)")
        if self.labels.shape != self.image.shape[2:]:
            raise DataError(
                f"{self.name}: étiquettes {self.labels.shape} vs image {self.image.shape[2:]}"
            )

    @property
    def height(self) -> int:
        return self.image.shape[2]

    @property
    def width(self) -> int:
        return self.image.shape[3]

    def validate_labels(self, num_classes: int, ignore_id: int) -> None:
        """
        Vérifie que chaque identifiant est dans [0, K) ou égal à ignore_id

        Raises:
            DataError: identifiant hors plage, avec sa position
        """
        bad = (self.labels >= num_classes) & (self.labels != ignore_id)
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise DataError(
                f"{self.name}: étiquette {int(self.labels[row, col])} hors de [0, {num_classes}) "
                f"en ({row}, {col})"
            )


@dataclass(frozen=True)
class PaletteEntry:
    """Une classe : identifiant, couleur et nom"""
    class_id: int
    r: int
    g: int
    b: int
    name: str

    @property
    def color(self) -> Tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass
class Palette:
    """Palette ordonnée ; l'entrée ignore est optionnelle"""
    entries: List[PaletteEntry] = field(default_factory=list)
    ignore_id: int = 255

    def __post_init__(self):
        ids = [e.class_id for e in self.entries]
        colors = [e.color for e in self.entries]
        if len(set(ids)) != len(ids):
            raise DataError("palette: identifiants de classe dupliqués")
        if len(set(colors)) != len(colors):
            raise DataError("palette: couleurs dupliquées")

    @property
    def classes(self) -> List[PaletteEntry]:
        """Entrées de classes (sans l'entrée ignore), triées par identifiant"""
        return sorted((e for e in self.entries if e.class_id != self.ignore_id),
                      key=lambda e: e.class_id)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @property
    def class_names(self) -> List[str]:
        return [e.name for e in self.classes]

    def color_of(self, class_id: int) -> Optional[Tuple[int, int, int]]:
        for entry in self.entries:
            if entry.class_id == class_id:
                return entry.color
        return None

    def color_table(self) -> Dict[int, Tuple[int, int, int]]:
        return {e.class_id: e.color for e in self.entries}

    def restricted(self, num_classes: int) -> "Palette":
        """Sous-palette des num_classes premières classes (plus l'entrée ignore)"""
        kept = [e for e in self.entries
                if e.class_id < num_classes or e.class_id == self.ignore_id]
        return Palette(entries=kept, ignore_id=self.ignore_id)

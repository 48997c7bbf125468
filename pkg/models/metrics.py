"""
Modèle de métriques de segmentation
"""

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd


@dataclass
class Metrics:
    """Matrice de confusion (lignes = vérité, colonnes = prédiction) et précisions dérivées"""
    confusion: np.ndarray
    per_class_accuracy: np.ndarray
    class_average_accuracy: float
    global_accuracy: float

    @classmethod
    def from_confusion(cls, confusion: np.ndarray) -> "Metrics":
        """
        Dérive les précisions d'une matrice de confusion K x K

        Les classes absentes de la vérité terrain ont une précision NaN
        et sont exclues de la moyenne par classe.
        """
        confusion = np.asarray(confusion, dtype=np.int64)
        rowsum = confusion.sum(axis=1)
        present = rowsum > 0
        per_class = np.full(confusion.shape[0], np.nan)
        per_class[present] = np.diag(confusion)[present] / rowsum[present]
        class_average = float(per_class[present].mean()) if present.any() else 0.0
        total = confusion.sum()
        global_accuracy = float(np.trace(confusion) / total) if total > 0 else 0.0
        return cls(
            confusion=confusion,
            per_class_accuracy=per_class,
            class_average_accuracy=class_average,
            global_accuracy=global_accuracy,
        )

    @property
    def num_classes(self) -> int:
        return self.confusion.shape[0]

    def to_dataframe(self, class_names: Optional[List[str]] = None) -> pd.DataFrame:
        """Tableau par classe : nom, pixels, précision"""
        names = class_names or [f"class_{k}" for k in range(self.num_classes)]
        return pd.DataFrame({
            "class_id": np.arange(self.num_classes),
            "name": names[:self.num_classes],
            "pixels": self.confusion.sum(axis=1),
            "accuracy": self.per_class_accuracy,
        })

    def to_dict(self) -> Dict:
        """Convertit en dictionnaire pour export JSON"""
        return {
            "confusion": self.confusion.tolist(),
            "per_class_accuracy": [None if np.isnan(a) else float(a) for a in self.per_class_accuracy],
            "class_average_accuracy": self.class_average_accuracy,
            "global_accuracy": self.global_accuracy,
        }

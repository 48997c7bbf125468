"""
Rapport de métriques : précision par classe, moyenne par classe et précision globale
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config import settings
from models.metrics import Metrics
from models.sample import Palette
from utils.file_utils import PathLike, save_table

logger = logging.getLogger(__name__)


class MetricsReport:
    """
    Met en forme des Metrics : une colonne par classe puis la moyenne par classe
    """

    def __init__(self, metrics: Metrics, palette: Optional[Palette] = None):
        """
        Args:
            metrics: Métriques calculées
            palette: Palette fournissant les noms de classes (défaut: class_0, class_1...)
        """
        self.metrics = metrics
        self.palette = palette

    @property
    def class_names(self) -> List[str]:
        names = self.palette.class_names if self.palette is not None else []
        if len(names) < self.metrics.num_classes:
            names = names + [f"class_{k}" for k in range(len(names), self.metrics.num_classes)]
        return names[:self.metrics.num_classes]

    @property
    def has_reference(self) -> bool:
        """Les noms de classes sont ceux du tableau de précisions publié"""
        return sorted(self.class_names) == sorted(settings.REFERENCE_CLASS_ACCURACY)

    def per_class_table(self) -> pd.DataFrame:
        """Tableau par classe (une ligne par classe), écrit en CSV"""
        frame = self.metrics.to_dataframe(self.class_names)
        if self.has_reference:
            frame["reference_accuracy"] = [settings.REFERENCE_CLASS_ACCURACY[n] for n in frame["name"]]
        return frame

    def _row(self, label: str, values: List[float], average: float) -> str:
        cells = ["   n/d" if np.isnan(v) else f"{v:6.3f}" for v in values]
        return f"{label:<12}" + " ".join(cells) + f" | {average:6.3f}"

    def render(self) -> str:
        """Texte du rapport : noms de classes en en-tête, mesures et référence éventuelle"""
        names = self.class_names
        header = f"{'':<12}" + " ".join(f"{n[:6]:>6}" for n in names) + " | moyenne"
        lines = [
            "=" * 70,
            "  Précision par classe",
            "=" * 70,
            header,
            self._row("mesuré", list(self.metrics.per_class_accuracy), self.metrics.class_average_accuracy),
        ]
        if self.has_reference:
            reference = [settings.REFERENCE_CLASS_ACCURACY[n] for n in names]
            lines.append(self._row("publié", reference, settings.REFERENCE_CLASS_AVERAGE))
            lines.append("  (référence publiée à titre documentaire, non reproduite à cette échelle)")
        lines.append("-" * 70)
        lines.append(f"Précision moyenne par classe: {self.metrics.class_average_accuracy:.4f}")
        lines.append(f"Précision globale: {self.metrics.global_accuracy:.4f}")
        return "\n".join(lines)

    def export(self, output_dir: Optional[PathLike] = None) -> Dict[str, Path]:
        """
        Exporte le tableau par classe, suivi des deux précisions agrégées

        Returns:
            {"metrics": chemin du CSV}
        """
        output_dir = Path(output_dir or settings.OUTPUT_DIR)
        frame = self.per_class_table()
        summary = pd.DataFrame({
            "class_id": [None, None],
            "name": ["class_average", "global"],
            "pixels": [int(self.metrics.confusion.sum())] * 2,
            "accuracy": [self.metrics.class_average_accuracy, self.metrics.global_accuracy],
        })
        path = save_table(pd.concat([frame, summary], ignore_index=True), output_dir / settings.METRICS_FILENAME)
        logger.info("métriques: %s", path)
        return {"metrics": path}

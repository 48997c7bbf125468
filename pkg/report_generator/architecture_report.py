"""
Rapport d'architecture : tableau des couches, total des paramètres,
taille du checkpoint et comparaison de taille avec d'autres réseaux
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from arch.layer_table import checkpoint_payload_bytes, layer_table
from arch.network import NetworkPlan, count_parameters, minimum_input_size
from config import settings
from utils.file_utils import PathLike, checkpoint_header_bytes, save_table

logger = logging.getLogger(__name__)

DEVIATION_MARKER = "≠paper"
MEGABYTE = 1024 * 1024


class ArchitectureReport:
    """
    Génère le rapport `summary` d'un plan de réseau
    """

    def __init__(self, plan: NetworkPlan,
                 input_hw: Tuple[int, int] = (settings.INPUT_HEIGHT, settings.INPUT_WIDTH)):
        """
        Args:
            plan: Plan du réseau
            input_hw: (h, w) de l'entrée utilisée pour les tailles de sortie

        Raises:
            SizingError: entrée trop petite pour le plan
        """
        self.plan = plan
        self.input_hw = input_hw
        self.table = layer_table(plan, input_hw)
        _, self.total_parameters = count_parameters(plan)

    @property
    def deviations(self) -> pd.DataFrame:
        return self.table[self.table["deviates"]]

    @property
    def compared(self) -> bool:
        """Comparaison au tableau publié possible (réseau pleine largeur)"""
        return self.plan.width_divisor == 1

    @property
    def payload_bytes(self) -> int:
        return checkpoint_payload_bytes(self.total_parameters)

    @property
    def checkpoint_bytes(self) -> int:
        return self.payload_bytes + checkpoint_header_bytes(self.plan.param_shapes())

    def layer_lines(self) -> List[str]:
        """Une ligne par ligne du tableau : 'conv1 | 237x177x96 | 7x7/2 (x96) | 14208'"""
        lines = []
        for row in self.table.itertuples(index=False):
            line = f"{row.layer} | {row.output} | {row.filter} | {row.parameters}"
            if row.deviates:
                line += f" {DEVIATION_MARKER} ({row.reference_parameters})"
            lines.append(line)
        return lines

    def deviation_lines(self) -> List[str]:
        return [f"{row.layer}: {row.note}" for row in self.deviations.itertuples(index=False)]

    def total_line(self) -> str:
        if not self.compared:
            return f"{self.total_parameters}"
        return (f"{self.total_parameters} (paper: {settings.REFERENCE_TOTAL_PARAMETERS}; "
                f"{len(self.deviations)} documented deviations)")

    def size_comparison(self) -> pd.DataFrame:
        """Paramètres et taille fp32 de la reconstruction face aux réseaux de référence"""
        own_mb = self.payload_bytes / MEGABYTE
        rows = [{
            "network": "Squeeze-SegNet (reconstruction)",
            "parameters": self.total_parameters,
            "size_mb": round(own_mb, 2),
            "class_average": None,
            "size_ratio": 1.0,
        }]
        for name, parameters, size_mb, class_average in settings.REFERENCE_ARCHITECTURES:
            rows.append({
                "network": name,
                "parameters": parameters,
                "size_mb": size_mb,
                "class_average": class_average,
                "size_ratio": round(size_mb / own_mb, 2) if size_mb else None,
            })
        return pd.DataFrame(rows)

    def render(self) -> str:
        """Texte complet du rapport"""
        height, width = self.input_hw
        lines = [
            "=" * 70,
            f"  Architecture : {self.plan.num_classes} classes, entrée {width}x{height}, "
            f"diviseur de largeur {self.plan.width_divisor}",
            "=" * 70,
            "couche | sortie LxHxC | filtre | paramètres",
        ]
        lines.extend(self.layer_lines())
        lines.append("-" * 70)
        lines.append(f"Total des paramètres: {self.total_line()}")
        for line in self.deviation_lines():
            lines.append(f"  {DEVIATION_MARKER} {line}")
        lines.append(
            f"Checkpoint: {self.payload_bytes} octets de valeurs float32 "
            f"(+ {self.checkpoint_bytes - self.payload_bytes} octets d'en-têtes) "
            f"= {self.checkpoint_bytes / MEGABYTE:.2f} Mo"
        )
        if self.compared:
            lines.append(f"Taille publiée du modèle: {settings.REFERENCE_MODEL_SIZE_MB} Mo")
        minimum = minimum_input_size(self.plan)
        if minimum is not None:
            lines.append(f"Plus petite entrée carrée admissible: {minimum}x{minimum}")
        lines.append("")
        lines.append("Comparaison de taille:")
        for row in self.size_comparison().itertuples(index=False):
            params = f"{int(row.parameters):,}".replace(",", " ") if pd.notna(row.parameters) else "n/d"
            size = f"{row.size_mb} Mo" if pd.notna(row.size_mb) else "n/d"
            ratio = f"x{row.size_ratio}" if pd.notna(row.size_ratio) else ""
            lines.append(f"  {row.network:<32} {params:>12} {size:>10} {ratio}")
        return "\n".join(lines)

    def export(self, output_dir: Optional[PathLike] = None) -> Dict[str, Path]:
        """
        Exporte le tableau des couches en CSV

        Returns:
            {"summary": chemin du CSV}
        """
        output_dir = Path(output_dir or settings.OUTPUT_DIR)
        path = save_table(self.table, output_dir / settings.SUMMARY_FILENAME)
        logger.info("tableau des couches: %s", path)
        return {"summary": path}

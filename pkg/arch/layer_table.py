"""
Tableau des couches : taille de sortie, filtre et paramètres par ligne,
comparé au tableau de référence publié
"""

from typing import Dict, List, Tuple

import pandas as pd

from arch.network import NetworkPlan, count_parameters, infer_shapes
from config import settings

TABLE_COLUMNS = [
    "layer", "output", "filter", "parameters",
    "reference_output", "reference_parameters", "deviates", "note",
]


def format_whc(shape: Tuple[int, int, int]) -> str:
    """(c, h, w) -> 'LxHxC' (notation du tableau publié)"""
    c, h, w = shape
    return f"{w}x{h}x{c}"


def layer_table(plan: NetworkPlan,
                input_hw: Tuple[int, int] = (settings.INPUT_HEIGHT, settings.INPUT_WIDTH)) -> pd.DataFrame:
    """
    Regroupe les couches du plan par ligne du tableau (le dropout est rattaché
    à Fire9, le recadrage à conv10_D) et compare chaque ligne à la référence

    La comparaison n'a de sens que pour le réseau pleine largeur ; avec un
    diviseur de largeur, les colonnes de référence restent vides.

    Args:
        plan: Plan du réseau
        input_hw: (h, w) de l'entrée

    Returns:
        DataFrame aux colonnes TABLE_COLUMNS, une ligne par ligne du tableau
    """
    shapes = dict(infer_shapes(plan, (input_hw[0], input_hw[1], plan.input_channels)))
    per_layer, _ = count_parameters(plan)
    reference: Dict[str, Tuple[str, int]] = {
        row: (output, params) for row, output, params in settings.REFERENCE_LAYER_TABLE
    }
    compare = plan.width_divisor == 1

    rows: List[Dict] = []
    index: Dict[str, int] = {}
    for layer in plan.layers:
        if layer.table_row not in index:
            index[layer.table_row] = len(rows)
            rows.append({"layer": layer.table_row, "filter": layer.describe(), "parameters": 0})
        row = rows[index[layer.table_row]]
        row["output"] = format_whc(shapes[layer.name])
        row["parameters"] += per_layer[layer.name]

    for row in rows:
        ref_output, ref_params = reference.get(row["layer"], (None, None)) if compare else (None, None)
        row["reference_output"] = ref_output
        row["reference_parameters"] = ref_params
        row["deviates"] = ref_params is not None and ref_params != row["parameters"]
        row["note"] = settings.DEVIATION_NOTES.get(row["layer"], "") if row["deviates"] else ""
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def checkpoint_payload_bytes(total_parameters: int) -> int:
    """Octets de données d'un checkpoint float32 (hors en-têtes)"""
    return 4 * total_parameters

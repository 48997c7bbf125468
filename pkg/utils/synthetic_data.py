"""
Jeu de données synthétique : rectangles de classes sur un fond, image = couleur de classe + bruit

Remplace CamVid pour les vérifications d'apprentissage à petite échelle.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from config import settings
from models.sample import Palette, Sample
from utils.exceptions import DataError
from utils.file_utils import default_palette
from utils.tensor_core import DTYPE, Rng

logger = logging.getLogger(__name__)

RANDOM_RECTANGLES = 3


def _draw(rng: Rng, low: int, high: int) -> int:
    """Entier uniforme dans [low, high]"""
    return low + int(rng.integers(high - low + 1, 1)[0])


def _labels_for(index: int, rng: Rng, count: int, dims: Tuple[int, int], num_classes: int) -> np.ndarray:
    height, width = dims
    background = int(rng.integers(num_classes, 1)[0])
    labels = np.full((height, width), background, dtype=np.int64)

    for _ in range(RANDOM_RECTANGLES):
        k = int(rng.integers(num_classes, 1)[0])
        rh = _draw(rng, max(1, height // 4), max(1, height // 2))
        rw = _draw(rng, max(1, width // 4), max(1, width // 2))
        top = _draw(rng, 0, height - rh)
        left = _draw(rng, 0, width - rw)
        labels[top:top + rh, left:left + rw] = k

    # classes garanties (tourniquet) : l'échantillon i reçoit i, i + count, ...
    guaranteed = list(range(index, num_classes, count))
    if guaranteed:
        strip = width // len(guaranteed)
        if strip < 1:
            raise DataError(f"largeur {width} insuffisante pour {len(guaranteed)} classes garanties")
        for slot, k in enumerate(guaranteed):
            rh = _draw(rng, max(1, height // 4), max(1, height // 2))
            rw = _draw(rng, max(1, strip // 2), strip)
            top = _draw(rng, 0, height - rh)
            left = slot * strip + _draw(rng, 0, strip - rw)
            labels[top:top + rh, left:left + rw] = k
    return labels


def synth_dataset(seed: int, count: int, dims: Tuple[int, int], num_classes: int,
                  noise: float = settings.SYNTHETIC_NOISE, palette: Optional[Palette] = None) -> List[Sample]:
    """
    Génère un jeu de données déterministe

    Args:
        seed: Graine
        count: Nombre d'échantillons
        dims: (h, w)
        num_classes: K (>= 2)
        noise: Écart-type du bruit gaussien ajouté à l'image
        palette: Couleurs de base (défaut: palette CamVid / générée)

    Returns:
        Liste de Sample ; chaque classe apparaît au moins une fois dans l'ensemble

    Raises:
        DataError: K < 2, count < 1 ou dimensions trop petites
    """
    if num_classes < 2:
        raise DataError(f"num_classes doit être >= 2 (reçu {num_classes})")
    if count < 1:
        raise DataError(f"count doit être >= 1 (reçu {count})")
    height, width = dims
    if height < 1 or width < 1:
        raise DataError(f"dimensions {dims} invalides")
    palette = palette or default_palette(num_classes)
    colors = np.zeros((num_classes, 3), dtype=np.float64)
    for k in range(num_classes):
        color = palette.color_of(k)
        if color is None:
            raise DataError(f"classe {k} absente de la palette")
        colors[k] = np.asarray(color) / 255.0

    root = Rng(seed)
    samples = []
    for index in range(count):
        layout_rng = root.derive(index, 0)
        noise_rng = root.derive(index, 1)
        labels = _labels_for(index, layout_rng, count, (height, width), num_classes)
        image = colors[labels].transpose(2, 0, 1)[None]
        if noise > 0:
            image = image + noise * noise_rng.normal(image.size).reshape(image.shape)
        image = np.clip(image, 0.0, 1.0).astype(DTYPE)
        samples.append(Sample(image=image, labels=labels, name=f"synth_{index:04d}"))
    logger.info("jeu synthétique: %d échantillons %dx%d, %d classes, graine %d",
                count, width, height, num_classes, seed)
    return samples

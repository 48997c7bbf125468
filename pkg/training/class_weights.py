"""
Pondération des classes par fréquence médiane
"""

import logging
from typing import Iterable, Tuple

import numpy as np

from config import settings
from models.sample import Sample
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


def count_class_statistics(samples: Iterable[Sample], num_classes: int,
                           ignore_id: int = settings.IGNORE_ID) -> Tuple[np.ndarray, np.ndarray]:
    """
    Compte les pixels par classe sur le jeu d'entraînement

    Args:
        samples: Échantillons
        num_classes: K
        ignore_id: Identifiant exclu

    Returns:
        (pixel_counts, image_counts) : pixels de chaque classe, et pixels totaux
        des images où la classe est présente
    """
    pixel_counts = np.zeros(num_classes, dtype=np.int64)
    image_counts = np.zeros(num_classes, dtype=np.int64)
    for sample in samples:
        sample.validate_labels(num_classes, ignore_id)
        labels = sample.labels[sample.labels != ignore_id].astype(np.int64)
        counts = np.bincount(labels, minlength=num_classes)
        pixel_counts += counts
        image_counts[counts > 0] += sample.labels.size
    return pixel_counts, image_counts


def median_frequency_weights(pixel_counts: np.ndarray, image_counts: np.ndarray) -> np.ndarray:
    """
    weight[k] = médiane(freq) / freq[k] avec freq[k] = pixel_counts[k] / image_counts[k]

    La médiane porte sur les classes présentes ; une classe absente reçoit un poids nul.

    Raises:
        DataError: moins de 2 classes ou aucune classe présente
    """
    pixel_counts = np.asarray(pixel_counts, dtype=np.float64)
    image_counts = np.asarray(image_counts, dtype=np.float64)
    if pixel_counts.shape != image_counts.shape or pixel_counts.size < 2:
        raise DataError(f"comptes de classes invalides: {pixel_counts.shape} / {image_counts.shape}")
    present = (pixel_counts > 0) & (image_counts > 0)
    if not present.any():
        raise DataError("aucune classe présente dans les étiquettes")

    freq = np.zeros_like(pixel_counts)
    freq[present] = pixel_counts[present] / image_counts[present]
    median = np.median(freq[present])
    weights = np.zeros_like(freq)
    weights[present] = median / freq[present]
    logger.debug("fréquence médiane %.6f sur %d classes présentes", median, int(present.sum()))
    return weights

"""
Prédiction par argmax et métriques de segmentation
"""

import logging
from typing import Optional, Sequence

import numpy as np

from arch.network import NetworkPlan, align_logits, net_forward
from config import settings
from models.metrics import Metrics
from models.sample import Sample
from utils.exceptions import DataError

logger = logging.getLogger(__name__)


def predict_labels(logits: np.ndarray) -> np.ndarray:
    """Argmax sur les canaux ; à égalité la plus petite classe l'emporte"""
    return np.argmax(logits, axis=1)


def confusion_matrix(truth: np.ndarray, prediction: np.ndarray, num_classes: int,
                     ignore_id: int = settings.IGNORE_ID) -> np.ndarray:
    """
    Matrice de confusion K x K (lignes = vérité), pixels ignorés exclus

    Raises:
        DataError: formes différentes ou identifiant hors plage
    """
    truth = np.asarray(truth)
    prediction = np.asarray(prediction)
    if truth.shape != prediction.shape:
        raise DataError(f"vérité {truth.shape} et prédiction {prediction.shape} différentes")
    counted = truth != ignore_id
    t = truth[counted].astype(np.int64)
    p = prediction[counted].astype(np.int64)
    if t.size and (t.min() < 0 or t.max() >= num_classes or p.min() < 0 or p.max() >= num_classes):
        raise DataError(f"identifiant de classe hors de [0, {num_classes})")
    counts = np.bincount(t * num_classes + p, minlength=num_classes * num_classes)
    return counts.reshape(num_classes, num_classes)


def metrics_from_confusion(confusion: np.ndarray) -> Metrics:
    return Metrics.from_confusion(confusion)


def evaluate(plan: NetworkPlan, params, dataset: Sequence[Sample],
             ignore_id: int = settings.IGNORE_ID, num_classes: Optional[int] = None) -> Metrics:
    """
    Évalue le réseau (mode évaluation) sur un jeu de données

    Args:
        plan: Plan du réseau
        params: Paramètres
        dataset: Échantillons (non vide)
        ignore_id: Identifiant exclu des métriques
        num_classes: K (défaut: celui du plan)

    Returns:
        Metrics accumulées sur tous les échantillons
    """
    if not dataset:
        raise DataError("jeu d'évaluation vide")
    num_classes = num_classes or plan.num_classes
    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    for sample in dataset:
        sample.validate_labels(num_classes, ignore_id)
        logits, _ = net_forward(plan, params, sample.image, training=False)
        prediction = predict_labels(align_logits(logits, sample.labels.shape))[0]
        confusion += confusion_matrix(sample.labels, prediction, num_classes, ignore_id)
    metrics = Metrics.from_confusion(confusion)
    logger.info("évaluation sur %d échantillons: précision moyenne par classe %.4f, globale %.4f",
                len(dataset), metrics.class_average_accuracy, metrics.global_accuracy)
    return metrics

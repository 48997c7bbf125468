"""
Chargement d'un répertoire de données : images/<nom>.ppm et labels/<nom>.pgm
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

from config import settings
from models.sample import Sample
from utils.exceptions import DataError
from utils.file_utils import PathLike, list_stems, load_image, load_labels

logger = logging.getLogger(__name__)

IMAGES_SUBDIR = "images"
LABELS_SUBDIR = "labels"


def load_sample(dataset_dir: PathLike, name: str) -> Sample:
    root = Path(dataset_dir)
    image = load_image(root / IMAGES_SUBDIR / f"{name}.ppm")
    labels = load_labels(root / LABELS_SUBDIR / f"{name}.pgm")
    return Sample(image=image, labels=labels, name=name)


def load_dataset(dataset_dir: PathLike, num_classes: int, ignore_id: int = settings.IGNORE_ID,
                 max_workers: Optional[int] = None) -> List[Sample]:
    """
    Charge et valide tous les échantillons, triés par nom

    Args:
        dataset_dir: Racine du jeu de données
        num_classes: K
        ignore_id: Identifiant ignoré
        max_workers: Threads de lecture (None = défaut de l'exécuteur)

    Returns:
        Liste de Sample

    Raises:
        DataError: répertoire vide, image sans étiquettes (ou inversement), étiquette hors plage
        FormatError: fichier mal formé
    """
    root = Path(dataset_dir)
    images_dir, labels_dir = root / IMAGES_SUBDIR, root / LABELS_SUBDIR
    if not images_dir.is_dir() or not labels_dir.is_dir():
        raise DataError(f"{root}: sous-répertoires {IMAGES_SUBDIR}/ et {LABELS_SUBDIR}/ requis")

    image_names = list_stems(images_dir, ".ppm")
    label_names = list_stems(labels_dir, ".pgm")
    unmatched = sorted(set(image_names) ^ set(label_names))
    if unmatched:
        raise DataError(f"{root}: fichiers sans correspondance: {', '.join(unmatched[:5])}")
    if not image_names:
        raise DataError(f"{root}: aucun échantillon")

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        samples = list(executor.map(lambda name: load_sample(root, name), image_names))
    for sample in samples:
        sample.validate_labels(num_classes, ignore_id)

    logger.info("%d échantillons chargés depuis %s", len(samples), root)
    return samples

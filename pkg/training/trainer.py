"""
Boucle d'entraînement SGD par mini-batchs

Chaque itération : tirage du batch (avec remise, générateur à graine),
passes avant en mode entraînement, perte pondérée sur le batch entier,
passes arrière, réduction des gradients dans l'ordre du batch, mise à jour.
La réduction ne dépend pas du mode d'exécution : le mode parallèle et le
mode séquentiel produisent les mêmes octets.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np

from arch.network import (
    NetworkPlan, align_logits, align_logits_backward, infer_shapes, net_backward, net_forward
)
from arch.param_store import ParamStore
from config import settings
from models.sample import Sample
from models.sgd_config import SgdConfig
from models.train_log import TrainLog
from training.optimizer import init_velocity, sgd_step
from utils.exceptions import DataError, NumericError
from utils.file_utils import save_checkpoint
from utils.nn_ops import softmax_cross_entropy
from utils.tensor_core import Rng

logger = logging.getLogger(__name__)

_SAMPLER_KEY = 1
_DROPOUT_KEY = 2


def _check_dataset(plan: NetworkPlan, dataset: Sequence[Sample], ignore_id: int) -> Tuple[int, int]:
    if not dataset:
        raise DataError("jeu d'entraînement vide")
    height, width = dataset[0].height, dataset[0].width
    for sample in dataset:
        if (sample.height, sample.width) != (height, width):
            raise DataError(
                f"{sample.name}: taille {sample.width}x{sample.height}, "
                f"le batch exige {width}x{height}"
            )
        sample.validate_labels(plan.num_classes, ignore_id)
    infer_shapes(plan, (height, width, plan.input_channels))
    return height, width


def checkpoint_name(iteration: int) -> str:
    return f"checkpoint_iter_{iteration:06d}{settings.CHECKPOINT_SUFFIX}"


def train(plan: NetworkPlan, params: ParamStore, dataset: Sequence[Sample], cfg: SgdConfig,
          class_weights: Optional[np.ndarray] = None, sequential: bool = False,
          ignore_id: int = settings.IGNORE_ID, log_every: int = settings.LOG_EVERY,
          checkpoint_every: int = 0, checkpoint_dir: Optional[Path] = None,
          max_workers: Optional[int] = None) -> Tuple[ParamStore, TrainLog]:
    """
    Entraîne le réseau

    Args:
        plan: Plan du réseau
        params: Paramètres initiaux (non modifiés, une copie est entraînée)
        dataset: Échantillons de même taille
        cfg: Hyperparamètres SGD (graine comprise)
        class_weights: Poids par classe (défaut: tous à 1)
        sequential: Exécution strictement séquentielle du batch
        ignore_id: Identifiant exclu de la perte
        log_every: Fréquence des messages de progression
        checkpoint_every: Fréquence des checkpoints intermédiaires (0 = aucun)
        checkpoint_dir: Répertoire des checkpoints intermédiaires
        max_workers: Nombre de threads en mode parallèle

    Returns:
        (paramètres finaux, TrainLog)

    Raises:
        NumericError: perte non finie, nomme l'itération
    """
    height, width = _check_dataset(plan, dataset, ignore_id)
    weights = (np.ones(plan.num_classes) if class_weights is None
               else np.asarray(class_weights, dtype=np.float64))
    if weights.shape != (plan.num_classes,):
        raise DataError(f"poids de classes {weights.shape}, attendu ({plan.num_classes},)")

    params = ParamStore(params).copy()
    velocity = init_velocity(params)
    log = TrainLog()
    root = Rng(cfg.seed)
    sampler = root.derive(_SAMPLER_KEY)
    executor = None if sequential else ThreadPoolExecutor(max_workers=max_workers or cfg.batch_size)
    start = time.perf_counter()

    logger.info("entraînement: %d itérations, batch %d, %d échantillons %dx%d, mode %s",
                cfg.max_iterations, cfg.batch_size, len(dataset), width, height,
                "séquentiel" if sequential else "parallèle")
    try:
        for step in range(cfg.max_iterations):
            iteration = step + 1
            lr = cfg.learning_rate_at(step)
            batch = [dataset[i] for i in sampler.integers(len(dataset), cfg.batch_size)]

            def forward(slot: int):
                rng = root.derive(_DROPOUT_KEY, step, slot)
                logits, cache = net_forward(plan, params, batch[slot].image, training=True, rng=rng)
                return logits, cache

            slots = range(len(batch))
            results = list(map(forward, slots)) if executor is None else list(executor.map(forward, slots))

            full_shape = results[0][0].shape
            logits = np.concatenate([align_logits(r[0], (height, width)) for r in results], axis=0)
            labels = np.stack([s.labels for s in batch])
            loss = softmax_cross_entropy(logits, labels, weights.astype(logits.dtype), ignore_id)
            if not np.isfinite(loss.loss):
                raise NumericError(f"perte non finie ({loss.loss})", iteration=iteration)

            def backward(slot: int):
                grad = align_logits_backward(loss.grad_logits[slot:slot + 1], full_shape)
                return net_backward(plan, params, results[slot][1], grad)

            grads_list = list(map(backward, slots)) if executor is None else list(executor.map(backward, slots))
            grads = grads_list[0]
            for other in grads_list[1:]:
                for name in grads:
                    grads[name] = grads[name] + other[name]

            sgd_step(params, grads, velocity, cfg, learning_rate=lr)
            log.append(iteration, loss.loss, lr, time.perf_counter() - start)

            if iteration % log_every == 0 or iteration == 1:
                logger.info("itération %d/%d: perte %.6f, lr %g",
                            iteration, cfg.max_iterations, loss.loss, lr)
            if checkpoint_every and checkpoint_dir is not None and iteration % checkpoint_every == 0:
                path = Path(checkpoint_dir) / checkpoint_name(iteration)
                save_checkpoint(params, path)
                logger.info("checkpoint intermédiaire: %s", path)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    logger.info("entraînement terminé en %.1f s", time.perf_counter() - start)
    return params, log

"""
Fixtures partagées : tableaux à graine, petit plan, échantillons synthétiques
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Ajouter la racine du dépôt au PYTHONPATH
sys.path.insert(0, str(Path(__file__).parent.parent))

from arch.network import build_squeeze_segnet
from arch.param_store import init_params
from utils.synthetic_data import synth_dataset
from utils.tensor_core import Rng


@pytest.fixture
def rng():
    """Générateur à graine fixe"""
    return Rng(1234)


@pytest.fixture
def tiny_plan():
    """Réseau complet à largeur réduite (diviseur 16), 3 classes"""
    return build_squeeze_segnet(num_classes=3, width_divisor=16)


@pytest.fixture
def tiny_params(tiny_plan):
    return init_params(tiny_plan, Rng(7).derive(0))


@pytest.fixture
def tiny_samples():
    """Deux échantillons synthétiques 64x48, 3 classes"""
    return synth_dataset(seed=7, count=2, dims=(48, 64), num_classes=3)


@pytest.fixture
def random_tensor():
    """Fabrique de tenseurs normaux à graine"""
    def make(shape, seed=0, dtype=np.float64):
        count = int(np.prod(shape))
        return Rng(seed).normal(count).reshape(shape).astype(dtype)
    return make

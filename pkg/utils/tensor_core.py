"""
Tenseurs denses de rang 4 (n, c, h, w) et générateur pseudo-aléatoire portable

Les tenseurs sont des numpy.ndarray en float32 (stockage) ; les harnais de
vérification de gradient travaillent en float64.
"""

from typing import Tuple

import numpy as np

from utils.exceptions import ShapeError

DTYPE = np.float32

_MASK64 = (1 << 64) - 1
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _splitmix(z: np.ndarray) -> np.ndarray:
    """Fonction de mélange splitmix64 (arithmétique uint64 modulo 2^64)"""
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class Rng:
    """
    Générateur splitmix64 : la i-ème sortie (i >= 1) vaut mix(seed + i * 0x9E3779B97F4A7C15)

    Le flux ne dépend que de la graine et du nombre de valeurs déjà tirées,
    il est donc identique bit à bit sur toutes les plateformes.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self.counter = 0

    def next_u64(self, count: int) -> np.ndarray:
        """Tire count entiers 64 bits non signés"""
        steps = np.arange(self.counter + 1, self.counter + count + 1, dtype=np.uint64)
        self.counter += count
        with np.errstate(over="ignore"):
            return _splitmix(np.uint64(self.seed) + steps * _GAMMA)

    def uniform(self, count: int) -> np.ndarray:
        """Flottants 64 bits uniformes dans [0, 1) (53 bits de mantisse)"""
        return (self.next_u64(count) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def normal(self, count: int) -> np.ndarray:
        """Loi normale centrée réduite par Box-Muller, valeurs par paires (cos, sin)"""
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        angle = 2.0 * np.pi * u[:, 1]
        z = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        return z.ravel()[:count]

    def integers(self, high: int, count: int) -> np.ndarray:
        """Entiers uniformes dans [0, high)"""
        return np.minimum((self.uniform(count) * high).astype(np.int64), high - 1)

    def derive(self, *keys: int) -> "Rng":
        """Sous-générateur indépendant, déterminé par la graine et les clés"""
        state = np.array([self.seed], dtype=np.uint64)
        with np.errstate(over="ignore"):
            for key in keys:
                salt = np.array([int(key) & _MASK64], dtype=np.uint64) * _GAMMA + np.uint64(1)
                state = _splitmix(state ^ salt)
        return Rng(int(state[0]))


def _check_dims(dims: Tuple[int, ...]) -> Tuple[int, int, int, int]:
    if len(dims) != 4:
        raise ShapeError(f"dimensions de rang 4 attendues, reçu {dims}")
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ShapeError(f"toutes les dimensions doivent être >= 1: {dims}")
    size = 1
    for d in dims:
        size *= d
    if size > np.iinfo(np.int64).max // np.dtype(DTYPE).itemsize:
        raise ShapeError(f"produit des dimensions trop grand: {dims}")
    return dims


def tensor_new(dims: Tuple[int, int, int, int], fill: float = 0.0, dtype=DTYPE) -> np.ndarray:
    """
    Crée un tenseur rempli d'une valeur constante

    Args:
        dims: (n, c, h, w), toutes >= 1
        fill: Valeur de remplissage

    Returns:
        Tenseur de forme dims

    Raises:
        ShapeError: dimension nulle ou produit débordant
    """
    return np.full(_check_dims(dims), fill, dtype=dtype)


def concat_channels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Concatène deux tenseurs sur l'axe des canaux

    Raises:
        ShapeError: n, h ou w différents
    """
    if a.ndim != 4 or b.ndim != 4:
        raise ShapeError(f"tenseurs de rang 4 attendus: {a.shape} et {b.shape}")
    if (a.shape[0], a.shape[2], a.shape[3]) != (b.shape[0], b.shape[2], b.shape[3]):
        raise ShapeError(f"concaténation impossible: {a.shape} et {b.shape}")
    return np.concatenate([a, b], axis=1)


def split_channels(x: np.ndarray, channels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse de concat_channels : (x[:, :channels], x[:, channels:])"""
    if not 0 < channels < x.shape[1]:
        raise ShapeError(f"découpage à {channels} canaux impossible pour {x.shape}")
    return x[:, :channels], x[:, channels:]


def he_init(dims: Tuple[int, ...], fan_in: int, rng: Rng, dtype=DTYPE) -> np.ndarray:
    """
    Tire un tenseur i.i.d. N(0, 2 / fan_in)

    Args:
        dims: Forme du tenseur (rang quelconque, dimensions >= 1)
        fan_in: Nombre d'entrées par sortie (>= 1)
        rng: Générateur (avance de prod(dims) tirages)
    """
    if fan_in < 1:
        raise ShapeError(f"fan_in doit être >= 1 (reçu {fan_in})")
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ShapeError(f"toutes les dimensions doivent être >= 1: {dims}")
    count = int(np.prod(dims))
    values = rng.normal(count) * np.sqrt(2.0 / fan_in)
    return values.reshape(dims).astype(dtype)

"""
Utilitaires de fichiers : images PPM/PGM, palette, colorisation,
checkpoints binaires, tableaux CSV et JSON
"""

import json
import logging
import math
import os
import struct
from pathlib import Path
from typing import Any, Dict, List, Mapping, Tuple, Union

import numpy as np
import pandas as pd

from arch.param_store import ParamStore
from config import settings
from models.sample import Palette, PaletteEntry
from models.train_log import TrainLog
from utils.exceptions import CheckpointError, DataError, FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_WHITESPACE = b" \t\r\n\v\f"


def _is_separator(data: bytes, pos: int) -> bool:
    """Blanc ou début de commentaire"""
    return data[pos] in _WHITESPACE or data[pos] == 0x23


# =============================================================================
# PPM (P6) / PGM (P5)
# =============================================================================

def _parse_netpbm(data: bytes, magic: bytes, channels: int, path: str) -> np.ndarray:
    """
    Décode un fichier Netpbm binaire 8 bits

    Returns:
        (h, w, channels) uint8

    Raises:
        FormatError: en-tête mal formé, maxval != 255, données tronquées
    """
    if data[:2] != magic:
        raise FormatError(f"signature {data[:2]!r}, attendu {magic!r}", offset=0, path=path)
    pos = 2
    fields: List[int] = []
    while len(fields) < 3:
        if pos >= len(data):
            raise FormatError("en-tête incomplet", offset=pos, path=path)
        if not _is_separator(data, pos):
            raise FormatError(f"séparateur attendu, reçu {data[pos:pos + 1]!r}", offset=pos, path=path)
        # blancs et commentaires
        while pos < len(data) and _is_separator(data, pos):
            if data[pos] == 0x23:
                end = data.find(b"\n", pos)
                pos = len(data) if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("entier attendu dans l'en-tête", offset=start, path=path)
        fields.append(int(data[start:pos]))

    width, height, maxval = fields
    if width < 1 or height < 1:
        raise FormatError(f"dimensions {width}x{height} invalides", offset=pos, path=path)
    if maxval != 255:
        raise FormatError(f"maxval {maxval}, seul 255 est accepté", offset=pos, path=path)
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise FormatError("blanc attendu après maxval", offset=pos, path=path)
    pos += 1

    expected = width * height * channels
    payload = data[pos:pos + expected]
    if len(payload) < expected:
        raise FormatError(
            f"données tronquées: {len(payload)} octets sur {expected}", offset=pos + len(payload), path=path
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)


def load_image(path: PathLike) -> np.ndarray:
    """
    Charge une image PPM P6 8 bits

    Returns:
        Tenseur (1, 3, h, w) float32, canaux R, G, B divisés par 255
    """
    data = Path(path).read_bytes()
    pixels = _parse_netpbm(data, b"P6", 3, str(path))
    image = pixels.transpose(2, 0, 1)[None].astype(np.float32) / np.float32(255)
    return np.ascontiguousarray(image)


def load_labels(path: PathLike) -> np.ndarray:
    """
    Charge une carte d'étiquettes PGM P5 8 bits

    Returns:
        Grille (h, w) int64 d'identifiants (255 = ignoré)
    """
    data = Path(path).read_bytes()
    return _parse_netpbm(data, b"P5", 1, str(path))[:, :, 0].astype(np.int64)


def encode_ppm(rgb: np.ndarray) -> bytes:
    """(h, w, 3) uint8 -> octets PPM P6"""
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise DataError(f"image RGB (h, w, 3) attendue, reçu {rgb.shape}")
    height, width = rgb.shape[:2]
    return f"P6\n{width} {height}\n255\n".encode("ascii") + rgb.tobytes()


def encode_pgm(grid: np.ndarray) -> bytes:
    """(h, w) valeurs 0..255 -> octets PGM P5"""
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise DataError(f"grille (h, w) attendue, reçu {grid.shape}")
    if grid.size and (grid.min() < 0 or grid.max() > 255):
        raise DataError("valeurs PGM hors de [0, 255]")
    height, width = grid.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + grid.astype(np.uint8).tobytes()


def image_to_rgb(image: np.ndarray) -> np.ndarray:
    """Tenseur (1, 3, h, w) dans [0, 1] -> (h, w, 3) uint8 (arrondi)"""
    if image.ndim != 4 or image.shape[:2] != (1, 3):
        raise DataError(f"image (1, 3, h, w) attendue, reçu {image.shape}")
    scaled = np.clip(np.rint(image[0].astype(np.float64) * 255), 0, 255)
    return scaled.astype(np.uint8).transpose(1, 2, 0)


def save_ppm(path: PathLike, rgb: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_ppm(rgb))
    return path


def save_pgm(path: PathLike, grid: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_pgm(grid))
    return path


# =============================================================================
# Palette et colorisation
# =============================================================================

PALETTE_COLUMNS = ["class_id", "r", "g", "b", "name"]


def load_palette(path: PathLike, ignore_id: int = settings.IGNORE_ID) -> Palette:
    """
    Charge une palette texte : lignes `class_id,r,g,b,name`, commentaires `#`

    Raises:
        DataError: fichier illisible, composante hors [0, 255], doublons
    """
    try:
        frame = pd.read_csv(path, comment="#", header=None, names=PALETTE_COLUMNS,
                            skipinitialspace=True, dtype={"name": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"palette illisible {path}: {exc}") from exc
    frame = frame.dropna(how="all")
    if frame[["class_id", "r", "g", "b"]].isna().any().any():
        raise DataError(f"palette {path}: ligne incomplète")
    values = frame[["class_id", "r", "g", "b"]].astype(np.int64)
    if ((values[["r", "g", "b"]] < 0) | (values[["r", "g", "b"]] > 255)).any().any():
        raise DataError(f"palette {path}: composante de couleur hors de [0, 255]")
    entries = [
        PaletteEntry(int(row.class_id), int(row.r), int(row.g), int(row.b), str(name).strip())
        for row, name in zip(values.itertuples(index=False), frame["name"].fillna(""))
    ]
    return Palette(entries=entries, ignore_id=ignore_id)


def default_palette(num_classes: int, ignore_id: int = settings.IGNORE_ID) -> Palette:
    """
    Palette CamVid pour K <= 11 ; au-delà, couleurs supplémentaires générées
    de façon déterministe (distinctes du noir réservé aux pixels ignorés)
    """
    entries = [PaletteEntry(*row) for row in settings.CAMVID_PALETTE[:num_classes]]
    used = {e.color for e in entries} | {settings.IGNORE_COLOR}
    k = len(entries)
    step = 0
    while k < num_classes:
        step += 1
        color = ((step * 67) % 256, (step * 151) % 256, (step * 29 + 97) % 256)
        if color in used:
            continue
        used.add(color)
        entries.append(PaletteEntry(k, *color, name=f"class_{k}"))
        k += 1
    entries.append(PaletteEntry(ignore_id, *settings.IGNORE_COLOR, name="Void"))
    return Palette(entries=entries, ignore_id=ignore_id)


def colorize_rgb(labels: np.ndarray, palette: Palette) -> np.ndarray:
    """
    Grille d'identifiants -> (h, w, 3) uint8 ; l'identifiant ignoré devient noir

    Raises:
        DataError: identifiant absent de la palette
    """
    labels = np.asarray(labels)
    table = np.zeros((256, 3), dtype=np.uint8)
    known = np.zeros(256, dtype=bool)
    for entry in palette.classes:
        if 0 <= entry.class_id < 256:
            table[entry.class_id] = entry.color
            known[entry.class_id] = True
    if 0 <= palette.ignore_id < 256:
        table[palette.ignore_id] = settings.IGNORE_COLOR
        known[palette.ignore_id] = True
    if labels.size and (labels.min() < 0 or labels.max() > 255 or not known[labels].all()):
        missing = sorted(set(np.unique(labels).tolist()) - set(np.flatnonzero(known).tolist()))
        raise DataError(f"identifiant(s) absent(s) de la palette: {missing[:5]}")
    return table[labels]


def colorize(labels: np.ndarray, palette: Palette) -> bytes:
    """Grille d'identifiants -> octets PPM P6"""
    return encode_ppm(colorize_rgb(labels, palette))


def decode_colors(rgb: np.ndarray, palette: Palette) -> np.ndarray:
    """
    Inverse de colorize_rgb : (h, w, 3) -> grille d'identifiants

    Raises:
        DataError: couleur absente de la palette
    """
    rgb = np.asarray(rgb, dtype=np.int64)
    keys = (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]
    lookup: Dict[int, int] = {(e.r << 16) | (e.g << 8) | e.b: e.class_id for e in palette.classes}
    black = (settings.IGNORE_COLOR[0] << 16) | (settings.IGNORE_COLOR[1] << 8) | settings.IGNORE_COLOR[2]
    lookup.setdefault(black, palette.ignore_id)
    unique, inverse = np.unique(keys, return_inverse=True)
    unknown = [int(key) for key in unique if int(key) not in lookup]
    if unknown:
        raise DataError(f"couleur(s) absente(s) de la palette: {[f'#{k:06x}' for k in unknown[:5]]}")
    ids = np.array([lookup[int(key)] for key in unique], dtype=np.int64)
    return ids[inverse].reshape(keys.shape)


# =============================================================================
# Checkpoints
# =============================================================================

_U32 = struct.Struct("<I")


def encode_checkpoint(params: Mapping[str, np.ndarray]) -> bytes:
    """
    En-tête : magic SQSG, version u32, nombre d'enregistrements u32
    Enregistrement : longueur du nom u32, nom UTF-8, rang u32, dimensions u32, valeurs float32 LE
    """
    chunks = [settings.CHECKPOINT_MAGIC, _U32.pack(settings.CHECKPOINT_VERSION), _U32.pack(len(params))]
    for name, value in params.items():
        encoded = name.encode("utf-8")
        chunks.append(_U32.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_U32.pack(value.ndim))
        chunks.extend(_U32.pack(int(d)) for d in value.shape)
        chunks.append(np.ascontiguousarray(value, dtype="<f4").tobytes())
    return b"".join(chunks)


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> ParamStore:
    """
    Raises:
        CheckpointError: magic ou version invalide, troncature, nom non UTF-8 ou dupliqué,
            dimension nulle, octets en trop
    """
    magic = settings.CHECKPOINT_MAGIC
    if data[:len(magic)] != magic:
        raise CheckpointError(f"{source}: signature {data[:len(magic)]!r}, attendu {magic!r}")
    pos = len(magic)

    def read_u32(what: str) -> int:
        nonlocal pos
        if pos + 4 > len(data):
            raise CheckpointError(f"{source}: tronqué en lisant {what} (octet {pos})")
        (value,) = _U32.unpack_from(data, pos)
        pos += 4
        return value

    version = read_u32("la version")
    if version != settings.CHECKPOINT_VERSION:
        raise CheckpointError(f"{source}: version {version}, attendu {settings.CHECKPOINT_VERSION}")
    count = read_u32("le nombre d'enregistrements")

    params = ParamStore()
    for index in range(count):
        name_len = read_u32(f"l'enregistrement {index}")
        if pos + name_len > len(data):
            raise CheckpointError(f"{source}: nom tronqué (octet {pos})")
        try:
            name = data[pos:pos + name_len].decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(f"{source}: nom non UTF-8 (octet {pos})") from None
        pos += name_len
        if name in params:
            raise CheckpointError(f"{source}: paramètre dupliqué {name}")
        rank = read_u32(f"le rang de {name}")
        if 4 * rank > len(data) - pos:
            raise CheckpointError(f"{source}: dimensions de {name} tronquées (octet {pos})")
        dims = tuple(read_u32(f"les dimensions de {name}") for _ in range(rank))
        if 0 in dims:
            raise CheckpointError(f"{source}: dimension nulle pour {name}: {dims}")
        # entiers Python : pas de débordement sur des dimensions corrompues
        nbytes = 4 * math.prod(dims)
        if nbytes > len(data) - pos:
            raise CheckpointError(f"{source}: valeurs de {name} tronquées (octet {pos})")
        params[name] = np.frombuffer(data, dtype="<f4", count=nbytes // 4, offset=pos).astype(np.float32).reshape(dims)
        pos += nbytes
    if pos != len(data):
        raise CheckpointError(f"{source}: {len(data) - pos} octets inattendus après le dernier enregistrement")
    return params


def save_checkpoint(params: Mapping[str, np.ndarray], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(params))
    logger.debug("checkpoint écrit: %s (%d paramètres)", path, len(params))
    return path


def load_checkpoint(path: PathLike) -> ParamStore:
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint introuvable: {path}")
    return decode_checkpoint(path.read_bytes(), source=str(path))


def checkpoint_header_bytes(shapes: Mapping[str, Tuple[int, ...]]) -> int:
    """Octets de l'en-tête et des descripteurs d'enregistrements (hors valeurs), d'après les formes"""
    overhead = len(settings.CHECKPOINT_MAGIC) + 8
    for name, shape in shapes.items():
        overhead += 4 + len(name.encode("utf-8")) + 4 + 4 * len(shape)
    return overhead


# =============================================================================
# Tableaux et JSON
# =============================================================================

def save_train_log(log: TrainLog, path: PathLike) -> Path:
    """Écrit `iteration,loss,lr`, une ligne par itération"""
    return save_table(log.to_dataframe(), path)


def save_table(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.9g")
    return path


def save_json(data: Any, file_path: PathLike, indent: int = 2) -> bool:
    """
    Sauvegarde des données en JSON

    Args:
        data: Données à sauvegarder
        file_path: Chemin de sortie
        indent: Indentation JSON

    Returns:
        True si succès
    """
    try:
        os.makedirs(os.path.dirname(str(file_path)) or ".", exist_ok=True)
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=indent, ensure_ascii=False)
        return True
    except (OSError, TypeError) as e:
        logger.error("Erreur sauvegarde JSON %s: %s", file_path, e)
        return False


def list_stems(directory: PathLike, suffix: str) -> List[str]:
    """Noms de base triés des fichiers d'un suffixe donné"""
    return sorted(p.stem for p in Path(directory).glob(f"*{suffix}") if p.is_file())


"""
Configuration centralisée du toolkit Squeeze-SegNet
Utilise des variables d'environnement (fichier .env optionnel) pour les valeurs par défaut
"""

import logging
import os
from pathlib import Path

# Charger les variables d'environnement depuis le fichier .env si présent
try:
    from dotenv import load_dotenv
    env_path = Path(__file__).parent.parent / ".env"
    if env_path.exists():
        load_dotenv(dotenv_path=env_path)
except ImportError:
    # python-dotenv non installé, continuer avec les variables d'environnement système
    pass

# Chemins de base
BASE_DIR = Path(__file__).parent.parent
CONFIG_DIR = Path(__file__).parent

OUTPUT_DIR = Path(os.getenv("SQSG_OUTPUT_DIR", str(BASE_DIR / "output")))

# Vide = jeu de données synthétique
DATASET_DIR = os.getenv("SQSG_DATASET_DIR", "")
PALETTE_PATH = os.getenv("SQSG_PALETTE_PATH", str(CONFIG_DIR / "camvid11_palette.txt"))

# Paramètres réseau
NUM_CLASSES = int(os.getenv("SQSG_NUM_CLASSES", "11"))
INPUT_CHANNELS = 3
INPUT_HEIGHT = 360
INPUT_WIDTH = 480
DROPOUT_RATE = float(os.getenv("SQSG_DROPOUT_RATE", "0.5"))
IGNORE_ID = 255

# Paramètres SGD (taille de batch et nombre d'itérations publiés, le reste par convention)
SEED = int(os.getenv("SQSG_SEED", "7"))
LEARNING_RATE = float(os.getenv("SQSG_LEARNING_RATE", "0.01"))
MOMENTUM = float(os.getenv("SQSG_MOMENTUM", "0.9"))
WEIGHT_DECAY = float(os.getenv("SQSG_WEIGHT_DECAY", "5e-4"))
BATCH_SIZE = int(os.getenv("SQSG_BATCH_SIZE", "4"))
MAX_ITERATIONS = int(os.getenv("SQSG_MAX_ITERATIONS", "44000"))
LR_DROP_FACTOR = float(os.getenv("SQSG_LR_DROP_FACTOR", "0.1"))
LR_DROP_EVERY = int(os.getenv("SQSG_LR_DROP_EVERY", "20000"))
CHECKPOINT_EVERY = int(os.getenv("SQSG_CHECKPOINT_EVERY", "0"))  # 0 = désactivé
LOG_EVERY = int(os.getenv("SQSG_LOG_EVERY", "50"))
CLASS_WEIGHTING = os.getenv("SQSG_CLASS_WEIGHTING", "median_frequency")

# Jeu de données synthétique (remplaçant CamVid à l'échelle du bureau)
SYNTHETIC_COUNT = 8
SYNTHETIC_HEIGHT = 48
SYNTHETIC_WIDTH = 64
SYNTHETIC_NOISE = 0.05

# Vérification des gradients
GRADCHECK_SEEDS = [0, 1, 2, 3, 4]
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_NETWORK_TOLERANCE = 1e-3
GRADCHECK_NETWORK_SAMPLES = 20
GRADCHECK_NETWORK_DIVISOR = 8
GRADCHECK_NETWORK_INPUT = (48, 64)  # (h, w)

# Format checkpoint
CHECKPOINT_MAGIC = b"SQSG"
CHECKPOINT_VERSION = 1
CHECKPOINT_SUFFIX = ".sqsg"

# Fichiers de sortie
TRAIN_LOG_FILENAME = "train_log.csv"
LOSS_CURVE_FILENAME = "loss_curve.html"
METRICS_FILENAME = "metrics.csv"
SUMMARY_FILENAME = "summary.csv"
GRADCHECK_FILENAME = "gradcheck.json"
FINAL_CHECKPOINT_FILENAME = "final" + CHECKPOINT_SUFFIX

# Palette CamVid 11 classes (ordre du tableau de précision publié), couleurs usuelles de la lignée SegNet
CAMVID_PALETTE = [
    (0, 128, 128, 128, "Sky"),
    (1, 128, 0, 0, "Building"),
    (2, 192, 192, 128, "Pole"),
    (3, 128, 64, 128, "Road"),
    (4, 60, 40, 222, "Sidewalk"),
    (5, 128, 128, 0, "Tree"),
    (6, 192, 128, 128, "Sign"),
    (7, 64, 0, 128, "Car"),
    (8, 64, 64, 128, "Fence"),
    (9, 64, 64, 0, "Pedestrian"),
    (10, 0, 128, 192, "Bicyclist"),
]
IGNORE_COLOR = (0, 0, 0)

# Tableau de référence publié : taille de sortie (LxHxC) et nombre de paramètres par ligne
REFERENCE_LAYER_TABLE = [
    ("conv1", "237x177x96", 14208),
    ("maxpool1", "118x88x96", 0),
    ("Fire2", "118x88x128", 11920),
    ("Fire3", "118x88x128", 12432),
    ("Fire4", "118x88x256", 45344),
    ("maxpool4", "59x44x256", 0),
    ("Fire5", "59x44x256", 49440),
    ("Fire6", "59x44x384", 104880),
    ("Fire7", "59x44x384", 111024),
    ("Fire8", "59x44x512", 188992),
    ("maxpool8", "29x22x512", 0),
    ("Fire9", "29x22x512", 197184),
    ("conv10", "31x24x1000", 513000),
    ("conv10_D", "29x22x512", 512512),
    ("DFire9", "29x22x512", 197184),
    ("upsample8", "59x44x512", 0),
    ("DFire8", "59x44x384", 188864),
    ("DFire7", "59x44x384", 111024),
    ("DFire6", "59x44x256", 104752),
    ("DFire5", "59x44x256", 74032),
    ("upsample4", "118x88x256", 0),
    ("DFire4", "118x88x128", 45216),
    ("DFire3", "118x88x128", 12432),
    ("DFire2", "118x88x96", 12432),
    ("upsample1", "237x177x96", 3760),
    ("conv1_D", "480x360x11", 203637),
]
REFERENCE_TOTAL_PARAMETERS = 2714269
REFERENCE_MODEL_SIZE_MB = 10.35

# Lignes où la reconstruction s'écarte volontairement du tableau publié
DEVIATION_NOTES = {
    "DFire2": "aucune largeur entière ne donne 12432 (copie de DFire3) ; largeurs 8+8 miroir de Fire2",
    "upsample1": "dépliage par indices sans paramètres ; aucune forme conv/biais sur 96 canaux ne donne 3760",
    "conv1_D": "10x10/2 (x11) sur 96 canaux donne 96*100*11+11 = 105611 ; 203637 non dérivable",
}

# Précisions par classe publiées sur CamVid (documentation, non reproduites à l'échelle du bureau)
REFERENCE_CLASS_ACCURACY = {
    "Sky": 0.945, "Building": 0.889, "Pole": 0.369, "Road": 0.936,
    "Sidewalk": 0.936, "Tree": 0.755, "Sign": 0.198, "Car": 0.01,
    "Fence": 0.977, "Pedestrian": 0.644, "Bicyclist": 0.676,
}
REFERENCE_CLASS_AVERAGE = 0.667

# Comparaison de taille de modèle (paramètres, Mo fp32, précision moyenne par classe)
REFERENCE_ARCHITECTURES = [
    ("SegNet", 29_400_000, 117.8, 0.65),
    ("SegNet-Basic", None, None, 0.63),
    ("ENet", 360_000, 1.5, 0.68),
]

# Configuration logs
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str = None) -> None:
    """
    Configure le module logging avec le format du projet

    Args:
        level: Niveau de log (défaut: LOG_LEVEL)
    """
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)

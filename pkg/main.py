#!/usr/bin/env python3
"""
Point d'entrée principal Squeeze-SegNet
Résumé d'architecture, vérification des gradients, entraînement, évaluation et prédiction

Usage:
    python3 main.py <commande> [options]

Codes de sortie:
    0  succès
    1  erreur de validation (configuration, données, format, checkpoint, forme)
    2  échec numérique (perte non finie, vérification de gradient échouée)
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

# Ajouter le répertoire courant au PYTHONPATH
sys.path.insert(0, str(Path(__file__).parent))

import numpy as np

from arch.network import align_logits, build_squeeze_segnet, net_forward, plan_from_params
from arch.param_store import init_params
from config import settings
from models.run_config import RunConfig
from models.sample import Palette, Sample
from report_generator.architecture_report import ArchitectureReport
from report_generator.metrics_report import MetricsReport
from training.class_weights import count_class_statistics, median_frequency_weights
from training.evaluation import evaluate, predict_labels
from training.trainer import train
from utils.charts import save_loss_curve
from utils.dataset_loader import load_dataset
from utils.exceptions import ConfigError, NumericError, SqueezeSegError
from utils.file_utils import (
    colorize, default_palette, load_checkpoint, load_image, load_palette,
    save_checkpoint, save_json, save_train_log
)
from utils.gradient_check import run_gradient_suite
from utils.synthetic_data import synth_dataset
from utils.tensor_core import Rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2

_INIT_KEY = 0


def print_banner(title: str):
    """Affiche une bannière"""
    print("\n" + "=" * 70)
    print(f"  {title}")
    print("=" * 70 + "\n")


def parse_input_size(text: str) -> Tuple[int, int]:
    """'480x360' -> (h, w) = (360, 480)"""
    try:
        width, height = (int(part) for part in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"taille invalide: {text!r} (attendu LxH, ex: 480x360)")
    if width < 1 or height < 1:
        raise argparse.ArgumentTypeError(f"taille invalide: {text!r}")
    return height, width


# =============================================================================
# Préparation commune
# =============================================================================

def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Défauts, puis fichier --config, puis options de ligne de commande"""
    overrides = {
        "seed": args.seed,
        "num_classes": args.classes,
        "max_iterations": args.max_iterations,
        "sequential": True if args.sequential else None,
        "output_dir": args.out,
        "checkpoint": getattr(args, "checkpoint", None),
        "dataset_dir": getattr(args, "dataset", None),
        "palette_path": getattr(args, "palette", None),
    }
    return RunConfig.load(args.config, overrides)


def resolve_palette(config: RunConfig, num_classes: int) -> Palette:
    """
    Palette du fichier configuré, restreinte aux K premières classes,
    ou palette par défaut si aucun fichier n'est configuré

    Raises:
        ConfigError: le fichier décrit moins de K classes
    """
    if not config.palette_path:
        return default_palette(num_classes)
    palette = load_palette(config.palette_path)
    if palette.num_classes < num_classes:
        raise ConfigError(
            f"palette {config.palette_path}: {palette.num_classes} classes pour K = {num_classes}"
        )
    return palette.restricted(num_classes)


def resolve_dataset(config: RunConfig, num_classes: int, palette: Palette) -> List[Sample]:
    """Répertoire de données configuré, sinon jeu synthétique"""
    if config.dataset_dir:
        return load_dataset(config.dataset_dir, num_classes)
    return synth_dataset(
        config.seed, config.synthetic_count,
        (config.synthetic_height, config.synthetic_width),
        num_classes, config.synthetic_noise, palette,
    )


def resolve_class_weights(config: RunConfig, dataset: List[Sample], num_classes: int) -> np.ndarray:
    if config.class_weighting == "none":
        return np.ones(num_classes)
    pixel_counts, image_counts = count_class_statistics(dataset, num_classes)
    return median_frequency_weights(pixel_counts, image_counts)


def require_checkpoint(config: RunConfig, command: str) -> str:
    if not config.checkpoint:
        raise ConfigError(f"{command}: --checkpoint (ou la clé checkpoint) est requis")
    return config.checkpoint


# =============================================================================
# Commandes
# =============================================================================

def cmd_summary(args: argparse.Namespace) -> int:
    """Tableau des couches, total des paramètres et taille du checkpoint"""
    config = load_run_config(args)
    plan = build_squeeze_segnet(config.num_classes, config.width_divisor, config.dropout_rate)
    report = ArchitectureReport(plan, args.input)

    print(report.render())
    files = report.export(config.output_dir)
    print(f"\n📄 Tableau CSV: {files['summary']}")
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    """Différences finies sur chaque opération et dérivée directionnelle du réseau"""
    config = load_run_config(args)
    seeds = [config.seed] if args.seed is not None else list(settings.GRADCHECK_SEEDS)
    tolerance = settings.GRADCHECK_TOLERANCE if args.tolerance is None else args.tolerance
    if tolerance < 0:
        raise ConfigError(f"tolérance négative: {tolerance}")

    print_banner(f"Vérification des gradients ({len(seeds)} graine(s), tolérance {tolerance:g})")
    results = run_gradient_suite(seeds, tolerance, include_network=not args.skip_network)
    for result in results:
        marker = "✓" if result.passed else "✗"
        print(f"  {marker} {result.name:<24} graine {result.seed}  "
              f"erreur {result.error:.3e}  (tolérance {result.tolerance:g})")

    report_path = Path(config.output_dir) / settings.GRADCHECK_FILENAME
    if save_json([r.to_dict() for r in results], report_path):
        print(f"\n📄 Résultats JSON: {report_path}")
    else:
        print(f"\n⚠️  Résultats non sauvegardés: {report_path}")

    failed = [r for r in results if not r.passed]
    print("\n" + "=" * 70)
    if failed:
        names = sorted({r.name for r in failed})
        print(f"✗ ÉCHEC: {len(failed)}/{len(results)} vérification(s) : {', '.join(names)}")
        print("=" * 70)
        return EXIT_NUMERIC
    print(f"✓ {len(results)} vérifications réussies")
    print("=" * 70)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """Entraînement SGD ; écrit le checkpoint final, le journal et la courbe de perte"""
    config = load_run_config(args)
    num_classes = config.num_classes
    palette = resolve_palette(config, num_classes)
    dataset = resolve_dataset(config, num_classes, palette)
    plan = build_squeeze_segnet(num_classes, config.width_divisor, config.dropout_rate)

    if config.checkpoint:
        params = load_checkpoint(config.checkpoint)
        params.validate_against(plan)
        print(f"📂 Reprise depuis {config.checkpoint}")
    else:
        params = init_params(plan, Rng(config.seed).derive(_INIT_KEY))
    weights = resolve_class_weights(config, dataset, num_classes)
    cfg = config.sgd_config()

    print_banner(f"Entraînement : {len(dataset)} échantillons, {cfg.max_iterations} itérations")
    print("⚖️  Poids des classes:")
    for name, weight in zip(palette.class_names, weights):
        print(f"   {name:<16} {weight:.4f}")
    print()

    output_dir = Path(config.output_dir)
    params, log = train(
        plan, params, dataset, cfg,
        class_weights=weights,
        sequential=config.sequential,
        log_every=config.log_every,
        checkpoint_every=config.checkpoint_every,
        checkpoint_dir=output_dir,
    )

    files = {
        "checkpoint": save_checkpoint(params, output_dir / settings.FINAL_CHECKPOINT_FILENAME),
        "train_log": save_train_log(log, output_dir / settings.TRAIN_LOG_FILENAME),
    }
    if len(log):
        files["loss_curve"] = save_loss_curve(log, output_dir / settings.LOSS_CURVE_FILENAME)
        print(f"\n📉 Perte: {log.entries[0].loss:.6f} → {log.entries[-1].loss:.6f}")

    print("\n" + "=" * 70)
    print("✓ ENTRAÎNEMENT TERMINÉ")
    print("=" * 70)
    print("\nFichiers créés:")
    for label, path in files.items():
        print(f"  📄 {label}: {path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    """Précision par classe, moyenne par classe et précision globale d'un checkpoint"""
    config = load_run_config(args)
    params = load_checkpoint(require_checkpoint(config, "eval"))
    plan = plan_from_params(params, config.dropout_rate)
    palette = resolve_palette(config, plan.num_classes)
    dataset = resolve_dataset(config, plan.num_classes, palette)

    metrics = evaluate(plan, params, dataset)
    report = MetricsReport(metrics, palette)
    print(report.render())
    files = report.export(config.output_dir)
    print(f"\n📄 Tableau CSV: {files['metrics']}")
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    """Carte de segmentation colorisée d'une image, à la taille de l'entrée"""
    config = load_run_config(args)
    checkpoint = require_checkpoint(config, "predict")
    image_path = Path(args.image)
    if not image_path.is_file():
        raise ConfigError(f"image introuvable: {image_path}")

    params = load_checkpoint(checkpoint)
    plan = plan_from_params(params, config.dropout_rate)
    palette = resolve_palette(config, plan.num_classes)
    image = load_image(image_path)
    height, width = image.shape[2:]

    logits, _ = net_forward(plan, params, image, training=False)
    labels = predict_labels(align_logits(logits, (height, width)))[0]
    encoded = colorize(labels, palette)

    output = Path(args.output) if args.output else Path(config.output_dir) / f"{image_path.stem}_pred.ppm"
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_bytes(encoded)
    print(f"✓ Prédiction {width}x{height} écrite: {output}")
    return EXIT_OK


COMMANDS = {
    "summary": cmd_summary,
    "gradcheck": cmd_gradcheck,
    "train": cmd_train,
    "eval": cmd_eval,
    "predict": cmd_predict,
}


# =============================================================================
# Analyse des arguments
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FICHIER", help="Fichier de configuration `clé = valeur`")
    common.add_argument("--seed", type=int, help=f"Graine (défaut: {settings.SEED})")
    common.add_argument("--classes", type=int, help=f"Nombre de classes K (défaut: {settings.NUM_CLASSES})")
    common.add_argument("--max-iterations", type=int, help="Nombre d'itérations d'entraînement")
    common.add_argument("--sequential", action="store_true", help="Exécution strictement séquentielle")
    common.add_argument("--out", metavar="DOSSIER", help=f"Répertoire de sortie (défaut: {settings.OUTPUT_DIR})")
    common.add_argument("--log-level", default=None, help=f"Niveau de log (défaut: {settings.LOG_LEVEL})")

    parser = argparse.ArgumentParser(
        description="Squeeze-SegNet : segmentation sémantique encodeur-décodeur en numpy",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples:
  python3 main.py summary                               # Tableau des couches (480x360)
  python3 main.py summary --input 64x48 --classes 2     # Autre entrée, 2 classes
  python3 main.py gradcheck                             # Suite de différences finies
  python3 main.py train --max-iterations 2000 --sequential
  python3 main.py eval --checkpoint output/final.sqsg
  python3 main.py predict --checkpoint output/final.sqsg --image rue.ppm
        """
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="commande")

    summary = subparsers.add_parser("summary", parents=[common], help="Rapport d'architecture")
    summary.add_argument("--input", type=parse_input_size, default=(settings.INPUT_HEIGHT, settings.INPUT_WIDTH),
                         metavar="LxH", help="Taille d'entrée (défaut: 480x360)")

    gradcheck = subparsers.add_parser("gradcheck", parents=[common], help="Vérification des gradients")
    gradcheck.add_argument("--tolerance", type=float,
                           help=f"Erreur relative maximale par opération (défaut: {settings.GRADCHECK_TOLERANCE:g})")
    gradcheck.add_argument("--skip-network", action="store_true", help="Omet la vérification du réseau complet")

    train_parser = subparsers.add_parser("train", parents=[common], help="Entraînement")
    train_parser.add_argument("--dataset", metavar="DOSSIER", help="Répertoire images/ + labels/")
    train_parser.add_argument("--checkpoint", help="Checkpoint de départ (reprise)")
    train_parser.add_argument("--palette", help="Fichier de palette")

    eval_parser = subparsers.add_parser("eval", parents=[common], help="Évaluation d'un checkpoint")
    eval_parser.add_argument("--checkpoint", help="Checkpoint à évaluer")
    eval_parser.add_argument("--dataset", metavar="DOSSIER", help="Répertoire images/ + labels/")
    eval_parser.add_argument("--palette", help="Fichier de palette (noms de classes)")

    predict = subparsers.add_parser("predict", parents=[common], help="Prédiction colorisée")
    predict.add_argument("--checkpoint", help="Checkpoint")
    predict.add_argument("--image", required=True, help="Image PPM d'entrée")
    predict.add_argument("--palette", help="Fichier de palette (couleurs)")
    predict.add_argument("--output", help="Fichier PPM de sortie (défaut: <out>/<image>_pred.ppm)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Point d'entrée principal

    Returns:
        Code de sortie (0, 1 ou 2)
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    settings.setup_logging(args.log_level)

    try:
        return COMMANDS[args.command](args)
    except NumericError as e:
        print(f"\n✗ ERREUR NUMÉRIQUE: {e}")
        return EXIT_NUMERIC
    except SqueezeSegError as e:
        print(f"\n✗ ERREUR: {e}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n⚠️  Interruption par l'utilisateur (Ctrl+C)")
        sys.exit(1)

"""
Tests de la ligne de commande (main.main) sur un réseau réduit et un jeu synthétique
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from main import main, parse_input_size
from utils.file_utils import image_to_rgb, load_checkpoint, load_image, save_ppm
from utils.synthetic_data import synth_dataset

SMALL_RUN = """
# réseau réduit, jeu synthétique 64x48
width_divisor = 16
batch_size = 2
synthetic_count = 2
synthetic_height = 48
synthetic_width = 64
log_every = 1
"""


@pytest.fixture
def run_config(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_RUN, encoding="utf-8")
    return str(path)


def _train(config, out, iterations=2, seed=7):
    return main(["train", "--config", config, "--classes", "3", "--seed", str(seed),
                 "--max-iterations", str(iterations), "--sequential", "--out", str(out)])


class TestSummary:
    """Commande summary"""

    def test_prints_table(self, tmp_path, capsys):
        assert main(["summary", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "conv1 | 237x177x96 | 7x7/2 (x96) | 14208" in out
        assert "2611939 (paper: 2714269; 3 documented deviations)" in out
        assert (tmp_path / "summary.csv").exists()

    def test_other_input_and_classes(self, tmp_path, capsys):
        assert main(["summary", "--input", "64x48", "--classes", "2", "--out", str(tmp_path)]) == 0
        assert "conv1_D | 64x48x2" in capsys.readouterr().out

    def test_parse_input_size(self):
        assert parse_input_size("480x360") == (360, 480)


class TestGradcheck:
    """Commande gradcheck"""

    def test_single_seed_without_network(self, tmp_path, capsys):
        assert main(["gradcheck", "--seed", "0", "--skip-network", "--out", str(tmp_path)]) == 0
        assert "✓ conv2d" in capsys.readouterr().out
        results = json.loads((tmp_path / "gradcheck.json").read_text(encoding="utf-8"))
        assert len(results) == 10
        assert all(r["passed"] and r["seed"] == 0 for r in results)

    def test_zero_tolerance_fails(self, tmp_path, capsys):
        code = main(["gradcheck", "--seed", "0", "--skip-network", "--tolerance", "0", "--out", str(tmp_path)])
        assert code == 2
        assert "✗" in capsys.readouterr().out
        results = json.loads((tmp_path / "gradcheck.json").read_text(encoding="utf-8"))
        assert not all(r["passed"] for r in results)


class TestValidationErrors:
    """Erreurs de validation : code 1, aucune sortie"""

    def test_invalid_config_value(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("width_divisor = 3\n", encoding="utf-8")
        out = tmp_path / "out"
        assert main(["train", "--config", str(config), "--out", str(out)]) == 1
        assert not out.exists()

    def test_unknown_config_key(self, tmp_path):
        config = tmp_path / "bad.cfg"
        config.write_text("batchsize = 2\n", encoding="utf-8")
        assert main(["summary", "--config", str(config), "--out", str(tmp_path / "o")]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main(["summary", "--config", str(tmp_path / "absent.cfg")]) == 1

    def test_eval_without_checkpoint(self, run_config, tmp_path):
        assert main(["eval", "--config", run_config, "--out", str(tmp_path)]) == 1

    def test_missing_checkpoint_file(self, run_config, tmp_path):
        assert main(["eval", "--config", run_config, "--checkpoint", str(tmp_path / "none.sqsg")]) == 1

    def test_gradcheck_negative_tolerance(self):
        assert main(["gradcheck", "--tolerance", "-1", "--skip-network", "--seed", "0"]) == 1

    def test_corrupt_checkpoint(self, tmp_path):
        # dimensions 2^31 x 2^31 x 4 annoncées, fichier de quelques octets
        corrupt = tmp_path / "corrupt.sqsg"
        corrupt.write_bytes(b"SQSG" + b"".join(
            int(v).to_bytes(4, "little") for v in (1, 1, 1)) + b"w" + b"".join(
            int(v).to_bytes(4, "little") for v in (3, 1 << 31, 1 << 31, 4)) + bytes(16))
        image = save_ppm(tmp_path / "street.ppm", np.zeros((48, 64, 3), dtype=np.uint8))
        assert main(["predict", "--checkpoint", str(corrupt), "--image", str(image),
                     "--out", str(tmp_path)]) == 1
        assert not (tmp_path / "street_pred.ppm").exists()


class TestTrainEvalPredict:
    """Chaîne complète sur un réseau réduit"""

    def test_train_writes_outputs(self, run_config, tmp_path):
        assert _train(run_config, tmp_path) == 0
        assert (tmp_path / "final.sqsg").exists()
        assert (tmp_path / "loss_curve.html").exists()
        log = pd.read_csv(tmp_path / "train_log.csv")
        assert log["iteration"].tolist() == [1, 2]

    def test_zero_iterations_saves_initial_weights(self, run_config, tmp_path):
        assert _train(run_config, tmp_path, iterations=0) == 0
        params = load_checkpoint(tmp_path / "final.sqsg")
        assert not params["conv1.b"].any()
        assert len(pd.read_csv(tmp_path / "train_log.csv")) == 0
        assert not (tmp_path / "loss_curve.html").exists()

    def test_same_seed_same_checkpoint(self, run_config, tmp_path):
        assert _train(run_config, tmp_path / "a") == 0
        assert _train(run_config, tmp_path / "b") == 0
        a = (tmp_path / "a" / "final.sqsg").read_bytes()
        b = (tmp_path / "b" / "final.sqsg").read_bytes()
        assert a == b

    def test_eval_and_predict(self, run_config, tmp_path, capsys):
        assert _train(run_config, tmp_path) == 0
        checkpoint = str(tmp_path / "final.sqsg")

        assert main(["eval", "--config", run_config, "--seed", "7",
                     "--checkpoint", checkpoint, "--out", str(tmp_path)]) == 0
        metrics = pd.read_csv(tmp_path / "metrics.csv")
        assert metrics["name"].tolist()[-2:] == ["class_average", "global"]
        assert "Sky" in capsys.readouterr().out

        sample = synth_dataset(seed=3, count=1, dims=(49, 65), num_classes=3)[0]
        image_path = save_ppm(tmp_path / "street.ppm", image_to_rgb(sample.image))
        assert main(["predict", "--config", run_config, "--checkpoint", checkpoint,
                     "--image", str(image_path), "--out", str(tmp_path)]) == 0
        prediction = load_image(tmp_path / "street_pred.ppm")
        assert prediction.shape == (1, 3, 49, 65)
        # seules les couleurs des trois premières classes apparaissent
        colors = {tuple(c) for c in image_to_rgb(prediction).reshape(-1, 3).tolist()}
        assert colors <= {(128, 128, 128), (128, 0, 0), (192, 192, 128)}

    def test_predict_missing_image(self, run_config, tmp_path):
        assert _train(run_config, tmp_path, iterations=0) == 0
        assert main(["predict", "--checkpoint", str(tmp_path / "final.sqsg"),
                     "--image", str(tmp_path / "absent.ppm")]) == 1

    def test_resume_from_checkpoint(self, run_config, tmp_path):
        assert _train(run_config, tmp_path / "first", iterations=1) == 0
        resumed = main(["train", "--config", run_config, "--classes", "3", "--max-iterations", "1",
                        "--checkpoint", str(tmp_path / "first" / "final.sqsg"),
                        "--sequential", "--out", str(tmp_path / "second")])
        assert resumed == 0
        first = load_checkpoint(tmp_path / "first" / "final.sqsg")
        second = load_checkpoint(tmp_path / "second" / "final.sqsg")
        assert any(not np.array_equal(first[n], second[n]) for n in first)

    def test_resume_with_wrong_classes(self, run_config, tmp_path):
        assert _train(run_config, tmp_path / "first", iterations=0) == 0
        code = main(["train", "--config", run_config, "--classes", "4", "--max-iterations", "1",
                     "--checkpoint", str(tmp_path / "first" / "final.sqsg"), "--out", str(tmp_path / "x")])
        assert code == 1


class TestTrainingScript:
    """run_training.sh : chaque étape propage le code de sortie de main.py"""

    def test_every_step_checks_pipestatus(self):
        script = Path(__file__).parent.parent / "run_training.sh"
        lines = script.read_text(encoding="utf-8").splitlines()
        steps = [i for i, line in enumerate(lines) if line.startswith("python3 main.py") and "| tee" in line]
        assert [lines[i].split()[2] for i in steps] == ["gradcheck", "train", "eval"]
        for i in steps:
            assert lines[i + 1].startswith("if [ ${PIPESTATUS[0]} -ne 0 ]"), lines[i]

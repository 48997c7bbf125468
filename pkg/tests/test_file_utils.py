"""
Tests des entrées/sorties : PPM/PGM, palette, checkpoints, jeux de données, configuration
"""

import struct

import numpy as np
import pandas as pd
import pytest

from arch.param_store import ParamStore
from config import settings
from models.run_config import RunConfig
from models.train_log import TrainLog
from utils.charts import save_loss_curve
from utils.dataset_loader import load_dataset
from utils.exceptions import CheckpointError, ConfigError, DataError, FormatError
from utils.file_utils import (
    checkpoint_header_bytes, colorize, colorize_rgb, decode_checkpoint, decode_colors,
    default_palette, encode_checkpoint, encode_pgm, encode_ppm, image_to_rgb, load_image,
    load_labels, load_palette, save_pgm, save_ppm, save_train_log
)
from utils.synthetic_data import synth_dataset

_U32 = struct.Struct("<I")


def _single_record(name, dims, payload):
    """Checkpoint d'un seul enregistrement, écrit à la main"""
    header = settings.CHECKPOINT_MAGIC + _U32.pack(settings.CHECKPOINT_VERSION) + _U32.pack(1)
    record = _U32.pack(len(name)) + name + _U32.pack(len(dims)) + b"".join(_U32.pack(d) for d in dims)
    return header + record + payload


@pytest.fixture
def camvid_palette():
    return load_palette(settings.PALETTE_PATH)


class TestNetpbm:
    """Décodage PPM P6 / PGM P5"""

    def test_ppm_with_comment(self, tmp_path):
        path = tmp_path / "a.ppm"
        path.write_bytes(b"P6\n# commentaire\n2 1\n255\n" + bytes([255, 0, 0, 0, 0, 255]))
        image = load_image(path)
        assert image.shape == (1, 3, 1, 2)
        assert image.dtype == np.float32
        assert image[0, :, 0, 0].tolist() == [1.0, 0.0, 0.0]
        assert image[0, :, 0, 1].tolist() == [0.0, 0.0, 1.0]

    def test_pgm_labels(self, tmp_path):
        path = save_pgm(tmp_path / "l.pgm", np.array([[0, 3], [255, 1]]))
        labels = load_labels(path)
        assert labels.dtype == np.int64
        assert labels.tolist() == [[0, 3], [255, 1]]

    def test_rgb_round_trip(self, tmp_path):
        rgb = np.arange(24, dtype=np.uint8).reshape(2, 4, 3)
        image = load_image(save_ppm(tmp_path / "x.ppm", rgb))
        assert np.array_equal(image_to_rgb(image), rgb)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "b.ppm"
        path.write_bytes(encode_pgm(np.zeros((1, 1))))
        with pytest.raises(FormatError) as info:
            load_image(path)
        assert info.value.offset == 0

    def test_maxval_rejected(self, tmp_path):
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
        with pytest.raises(FormatError):
            load_labels(path)

    def test_truncated_payload_reports_offset(self, tmp_path):
        path = tmp_path / "d.ppm"
        data = encode_ppm(np.zeros((2, 2, 3), dtype=np.uint8))
        path.write_bytes(data[:-5])
        with pytest.raises(FormatError) as info:
            load_image(path)
        assert info.value.offset == len(data) - 5
        assert "octet" in str(info.value)

    def test_garbage_header(self, tmp_path):
        path = tmp_path / "e.pgm"
        path.write_bytes(b"P5\nxx 1\n255\n\x00")
        with pytest.raises(FormatError):
            load_labels(path)


class TestPalette:
    """Palette, colorisation et décodage des couleurs"""

    def test_camvid_file(self, camvid_palette):
        assert camvid_palette.num_classes == 11
        assert camvid_palette.class_names[0] == "Sky"
        assert camvid_palette.class_names[-1] == "Bicyclist"
        assert camvid_palette.color_of(255) == (0, 0, 0)

    def test_default_palette_extends_beyond_camvid(self):
        palette = default_palette(14)
        colors = [e.color for e in palette.classes]
        assert len(colors) == 14
        assert len(set(colors)) == 14
        assert (0, 0, 0) not in colors

    def test_colorize_ignore_is_black(self, camvid_palette):
        rgb = colorize_rgb(np.array([[0, 255]]), camvid_palette)
        assert rgb[0, 0].tolist() == [128, 128, 128]
        assert rgb[0, 1].tolist() == [0, 0, 0]

    def test_colorize_unknown_id(self):
        with pytest.raises(DataError):
            colorize_rgb(np.array([[5]]), default_palette(3))

    def test_decode_inverts_colorize(self, camvid_palette):
        labels = np.array([[0, 1, 2], [10, 255, 7]])
        assert np.array_equal(decode_colors(colorize_rgb(labels, camvid_palette), camvid_palette), labels)

    def test_decode_unknown_color(self, camvid_palette):
        with pytest.raises(DataError):
            decode_colors(np.array([[[1, 2, 3]]]), camvid_palette)

    def test_colorize_bytes_are_ppm(self):
        data = colorize(np.zeros((3, 5), dtype=np.int64), default_palette(2))
        assert data.startswith(b"P6\n5 3\n255\n")
        assert len(data) == len(b"P6\n5 3\n255\n") + 3 * 5 * 3


class TestCheckpoint:
    """Format binaire des checkpoints"""

    @pytest.fixture
    def params(self):
        return ParamStore({
            "conv1.w": np.arange(24, dtype=np.float32).reshape(2, 3, 2, 2),
            "conv1.b": np.array([0.5, -1.25], dtype=np.float32),
        })

    def test_round_trip(self, params):
        decoded = decode_checkpoint(encode_checkpoint(params))
        assert list(decoded) == list(params)
        assert all(np.array_equal(decoded[n], params[n]) for n in params)

    def test_size_accounting(self, params):
        data = encode_checkpoint(params)
        shapes = {name: value.shape for name, value in params.items()}
        assert len(data) == checkpoint_header_bytes(shapes) + 4 * params.total_size()

    def test_float64_is_stored_as_float32(self, params):
        decoded = decode_checkpoint(encode_checkpoint(params.astype(np.float64)))
        assert decoded["conv1.w"].dtype == np.float32

    def test_bad_magic(self, params):
        data = encode_checkpoint(params)
        with pytest.raises(CheckpointError):
            decode_checkpoint(b"XXXX" + data[4:])

    def test_bad_version(self, params):
        data = bytearray(encode_checkpoint(params))
        data[4] = 9
        with pytest.raises(CheckpointError):
            decode_checkpoint(bytes(data))

    @pytest.mark.parametrize("cut", [2, 10, 20, 40])
    def test_truncated(self, params, cut):
        with pytest.raises(CheckpointError):
            decode_checkpoint(encode_checkpoint(params)[:-cut])

    def test_trailing_bytes(self, params):
        with pytest.raises(CheckpointError):
            decode_checkpoint(encode_checkpoint(params) + b"\x00")

    def test_overflowing_dims(self):
        # 0xFFFFFFFF x 0xFFFFFFFF éléments annoncés pour 16 octets de valeurs
        data = _single_record(b"w", (0xFFFFFFFF, 0xFFFFFFFF), bytes(16))
        with pytest.raises(CheckpointError):
            decode_checkpoint(data)

    def test_rank_larger_than_file(self):
        data = _single_record(b"w", (), b"")[:-4] + _U32.pack(1 << 30)
        with pytest.raises(CheckpointError):
            decode_checkpoint(data)

    def test_zero_dim(self):
        with pytest.raises(CheckpointError):
            decode_checkpoint(_single_record(b"w", (2, 0), b""))

    def test_scalar_record(self):
        decoded = decode_checkpoint(_single_record(b"s", (), struct.pack("<f", 2.5)))
        assert decoded["s"].shape == ()
        assert float(decoded["s"]) == 2.5

    def test_name_must_be_utf8(self):
        with pytest.raises(CheckpointError):
            decode_checkpoint(_single_record(b"\xff\xfe", (1,), bytes(4)))


class TestTables:
    """Journal d'entraînement et courbe de perte"""

    def test_train_log_csv(self, tmp_path):
        log = TrainLog()
        log.append(1, 2.5, 0.01, 0.1)
        log.append(2, 1.5, 0.01, 0.2)
        frame = pd.read_csv(save_train_log(log, tmp_path / "log.csv"))
        assert list(frame.columns) == ["iteration", "loss", "lr"]
        assert frame["loss"].tolist() == [2.5, 1.5]

    def test_train_log_requires_increasing_iterations(self):
        log = TrainLog()
        log.append(2, 1.0, 0.01, 0.0)
        with pytest.raises(DataError):
            log.append(2, 1.0, 0.01, 0.0)

    def test_loss_curve_html(self, tmp_path):
        log = TrainLog()
        for i in range(1, 6):
            log.append(i, 1.0 / i, 0.01, 0.0)
        path = save_loss_curve(log, tmp_path / "curve.html")
        assert "<html" in path.read_text(encoding="utf-8").lower()

    def test_loss_curve_empty_log(self, tmp_path):
        with pytest.raises(DataError):
            save_loss_curve(TrainLog(), tmp_path / "curve.html")


class TestDatasets:
    """Jeu synthétique et répertoire de données"""

    def test_synthetic_is_deterministic(self):
        a = synth_dataset(seed=7, count=3, dims=(48, 64), num_classes=11)
        b = synth_dataset(seed=7, count=3, dims=(48, 64), num_classes=11)
        assert all(np.array_equal(x.image, y.image) and np.array_equal(x.labels, y.labels)
                   for x, y in zip(a, b))

    def test_synthetic_covers_every_class(self):
        samples = synth_dataset(seed=7, count=8, dims=(48, 64), num_classes=11)
        present = set()
        for sample in samples:
            present |= set(np.unique(sample.labels).tolist())
            assert sample.image.shape == (1, 3, 48, 64)
            assert sample.image.min() >= 0.0 and sample.image.max() <= 1.0
        assert present == set(range(11))

    def test_synthetic_rejects_single_class(self):
        with pytest.raises(DataError):
            synth_dataset(seed=0, count=1, dims=(8, 8), num_classes=1)

    def _write(self, root, name, labels):
        labels = np.asarray(labels)
        rgb = colorize_rgb(labels, default_palette(3))
        save_ppm(root / "images" / f"{name}.ppm", rgb)
        save_pgm(root / "labels" / f"{name}.pgm", labels)

    def test_load_dataset_sorted(self, tmp_path):
        self._write(tmp_path, "b", [[0, 1], [2, 255]])
        self._write(tmp_path, "a", [[1, 1], [1, 1]])
        samples = load_dataset(tmp_path, num_classes=3)
        assert [s.name for s in samples] == ["a", "b"]
        assert samples[1].labels.tolist() == [[0, 1], [2, 255]]

    def test_load_dataset_unmatched(self, tmp_path):
        self._write(tmp_path, "a", [[0]])
        save_pgm(tmp_path / "labels" / "orphan.pgm", np.zeros((1, 1)))
        with pytest.raises(DataError):
            load_dataset(tmp_path, num_classes=3)

    def test_load_dataset_label_out_of_range(self, tmp_path):
        self._write(tmp_path, "a", [[0, 1]])
        save_pgm(tmp_path / "labels" / "a.pgm", np.array([[0, 9]]))
        with pytest.raises(DataError):
            load_dataset(tmp_path, num_classes=3)


class TestRunConfig:
    """Fichier `clé = valeur` et priorité des options"""

    def test_defaults(self):
        config = RunConfig.load()
        assert config.seed == settings.SEED
        assert config.sgd_config().batch_size == settings.BATCH_SIZE

    def test_file_and_overrides(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# essai\nseed = 3\nbatch_size = 2\nsequential = true\n", encoding="utf-8")
        config = RunConfig.load(str(path), {"seed": 11, "num_classes": None})
        assert config.seed == 11
        assert config.batch_size == 2
        assert config.sequential is True
        assert config.num_classes == settings.NUM_CLASSES

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("learning_rat = 0.1\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.load(str(path))

    @pytest.mark.parametrize("line", [
        "batch_size = zero", "momentum = 1.5", "width_divisor = 3",
        "class_weighting = inverse", "num_classes = 1", "dataset_dir = /nonexistent/dir",
    ])
    def test_invalid_values(self, tmp_path, line):
        path = tmp_path / "run.cfg"
        path.write_text(line + "\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            RunConfig.load(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig.load(str(tmp_path / "absent.cfg"))

    def test_key_without_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed\nbatch_size = 2\n", encoding="utf-8")
        with pytest.raises(ConfigError) as info:
            RunConfig.load(str(path))
        assert "seed" in str(info.value)

import json

import numpy as np
import pytest

from src import cli
from src.cli import COMMANDS, REQUIRED, config_from_args, log_level, main, parse_args
from src.errors import ConfigError, StorageError, from_exception
from src.settings import CONFIG_PATH, load_config, settings_from_config
from src.synthetic import binary_blobs


@pytest.fixture(autouse=True)
def isolated(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PTW_CONFIG", raising=False)
    monkeypatch.delenv("LOG_LEVEL", raising=False)
    monkeypatch.delenv("PTW_WORKERS", raising=False)


@pytest.fixture
def blobs_csv(tmp_path, csv_writer):
    ds = binary_blobs(n=40, separation=6.0, seed=1)
    return csv_writer(tmp_path / "blobs.csv", ds.features, ds.labels)


def value_of(out: str, key: str) -> str:
    for token in out.split():
        if token.startswith(key + "="):
            return token.split("=", 1)[1]
    raise AssertionError(f"{key} not printed: {out!r}")


class TestConfigFromArgs:
    @pytest.fixture
    def settings(self):
        return settings_from_config(load_config(CONFIG_PATH))

    def test_every_command_has_required_flags(self):
        assert set(REQUIRED) == set(COMMANDS)

    def test_c2_follows_c1(self, settings):
        config = config_from_args(parse_args(["train", "--data", "d", "--model", "m", "--c1", "3"]), settings)
        assert (config.hyperparams.c1, config.hyperparams.c2) == (3.0, 3.0)

    def test_grid_for_cv(self, settings):
        args = parse_args(["cv", "--data", "d", "--output", "o", "--c1", "0.5,2", "--tau", "0.25"])
        grid = config_from_args(args, settings).settings.grid
        assert grid.c1 == (0.5, 2.0)
        assert grid.c2 is None
        assert grid.tau == (0.25,)

    def test_train_takes_single_values(self, settings):
        with pytest.raises(ConfigError, match="single value"):
            config_from_args(parse_args(["train", "--data", "d", "--model", "m", "--tau", "0.1,0.5"]), settings)

    def test_pca_components_count_or_fraction(self, settings):
        base = ["extract-pi", "--data", "d", "--output", "o"]
        assert config_from_args(parse_args(base + ["--pca-components", "2"]), settings).settings.pca_components == 2
        assert config_from_args(parse_args(base + ["--pca-components", "0.9"]), settings).settings.pca_components == 0.9


class TestTrainPredict:
    def test_predict_reproduces_train_accuracy(self, tmp_path, capsys, blobs_csv):
        model = tmp_path / "model.json"
        assert main(["train", "--data", str(blobs_csv), "--model", str(model)]) == 0
        train_accuracy = value_of(capsys.readouterr().out, "train_accuracy")

        out = tmp_path / "pred.tsv"
        assert main(["predict", "--data", str(blobs_csv), "--model", str(model), "--output", str(out)]) == 0
        assert value_of(capsys.readouterr().out, "accuracy") == train_accuracy
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "index\tlabel\td_pos\td_neg"
        assert len(lines) == 41

    def test_dimension_mismatch(self, tmp_path, capsys, blobs_csv, csv_writer):
        model = tmp_path / "model.json"
        assert main(["train", "--data", str(blobs_csv), "--model", str(model), "--method", "pin_twsvm"]) == 0
        wide = csv_writer(tmp_path / "wide.csv", np.ones((4, 3)), np.array([1, -1, 1, -1]))
        code = main(["predict", "--data", str(wide), "--model", str(model), "--output", str(tmp_path / "p.tsv")])
        assert code == 3
        assert "error=DimensionError" in capsys.readouterr().err

    def test_missing_required_flag(self, capsys, blobs_csv):
        assert main(["train", "--data", str(blobs_csv)]) == 2
        assert "--model" in capsys.readouterr().err

    def test_bad_number(self, tmp_path, capsys, blobs_csv):
        code = main(["train", "--data", str(blobs_csv), "--model", str(tmp_path / "m.json"), "--c1", "abc"])
        assert code == 2
        assert "error=ConfigError" in capsys.readouterr().err

    def test_missing_data_file(self, tmp_path, capsys):
        code = main(["train", "--data", str(tmp_path / "absent.csv"), "--model", str(tmp_path / "m.json")])
        assert code == 3


class TestFailureReporting:
    def test_model_in_missing_directory(self, tmp_path, capsys, blobs_csv):
        model = tmp_path / "nowhere" / "model.json"
        code = main(["train", "--data", str(blobs_csv), "--model", str(model), "--method", "pin_twsvm"])
        assert code == 3
        last = capsys.readouterr().err.strip().splitlines()[-1]
        assert last.startswith("error=StorageError exit=3 reason=")
        assert "model.json" in last

    def test_unknown_log_level(self, tmp_path, capsys, monkeypatch, blobs_csv):
        monkeypatch.setenv("LOG_LEVEL", "LOUD")
        code = main(["train", "--data", str(blobs_csv), "--model", str(tmp_path / "m.json")])
        assert code == 2
        assert "error=ConfigError exit=2 reason=LOG_LEVEL must be one of" in capsys.readouterr().err

    def test_lowercase_log_level_is_accepted(self, monkeypatch):
        monkeypatch.setenv("LOG_LEVEL", "debug")
        assert log_level() == "DEBUG"

    def test_value_error_from_a_dependency(self, tmp_path, capsys, monkeypatch, blobs_csv):
        def reject(*args, **kwargs):
            raise ValueError("Input contains NaN")

        monkeypatch.setattr(cli, "fit_model", reject)
        code = main(["train", "--data", str(blobs_csv), "--model", str(tmp_path / "m.json")])
        assert code == 3
        assert capsys.readouterr().err.strip().splitlines()[-1] == (
            "error=DatasetError exit=3 reason=Input contains NaN"
        )

    def test_library_errors_pass_through(self):
        original = ConfigError("bad")
        assert from_exception(original) is original
        wrapped = from_exception(FileNotFoundError(2, "No such file or directory", "/x/y.json"))
        assert isinstance(wrapped, StorageError)
        assert str(wrapped) == "No such file or directory: /x/y.json"


class TestCv:
    def test_output_is_byte_identical(self, tmp_path, blobs_csv):
        outputs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            argv = ["cv", "--data", str(blobs_csv), "--output", str(out), "--folds", "2"]
            argv += ["--c1", "0.5,1", "--tau", "0.5", "--method", "pin_twsvm", "--seed", "7"]
            assert main(argv) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
        records = [json.loads(line) for line in outputs[0].decode("utf-8").splitlines()]
        assert [r["record"] for r in records] == ["fold", "fold", "summary"]
        assert records[-1]["seed"] == 7


class TestExtractPi:
    def test_writes_features_and_basis(self, tmp_path, capsys, blobs_csv):
        out = tmp_path / "pi.csv"
        assert main(["extract-pi", "--data", str(blobs_csv), "--output", str(out), "--pca-components", "1"]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "pc1"
        assert len(lines) == 41
        document = json.loads((tmp_path / "pi.basis.json").read_text(encoding="utf-8"))
        assert set(document) == {"pca", "scaling"}
        assert value_of(capsys.readouterr().out, "components") == "1"


class TestDetectEval:
    def test_curve_records(self, tmp_path):
        dets = tmp_path / "dets.txt"
        dets.write_text("img1 0 0 2 2 0.9\nimg1 5 5 6 6 0.3\n", encoding="utf-8")
        gts = tmp_path / "gt.txt"
        gts.write_text("img1 0 0 2 2\n", encoding="utf-8")
        out = tmp_path / "curve.jsonl"
        argv = ["detect-eval", "--detections", str(dets), "--ground-truth", str(gts), "--output", str(out)]
        assert main(argv) == 0
        records = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
        assert [(r["miss_rate"], r["fppi"]) for r in records] == [(1.0, 0.0), (0.0, 0.0), (0.0, 1.0)]

    def test_missing_ground_truth_flag(self, tmp_path):
        argv = ["detect-eval", "--detections", "d.txt", "--output", str(tmp_path / "c.jsonl")]
        assert main(argv) == 2


class TestBench:
    def test_speed_table(self, tmp_path, monkeypatch):
        from src import benchmarks

        original = benchmarks.speed_suite
        monkeypatch.setattr(benchmarks, "speed_suite", lambda settings, seed=0: original(settings, m=12, seed=seed))
        out = tmp_path / "bench"
        assert main(["bench", "--suite", "speed", "--seeds", "1", "--output", str(out)]) == 0
        header = (out / "speed.tsv").read_text(encoding="utf-8").splitlines()[0].split("\t")
        assert "decomposition_seconds" in header and "oracle_seconds" in header

    def test_bad_seed_count(self, tmp_path):
        assert main(["bench", "--suite", "blobs", "--seeds", "0", "--output", str(tmp_path / "b")]) == 2

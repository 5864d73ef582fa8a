import csv
from dataclasses import replace

import pytest

from src import benchmarks
from src.datasets import Hyperparams
from src.errors import ConfigError
from src.settings import CONFIG_PATH, load_config, settings_from_config


@pytest.fixture
def settings():
    return settings_from_config(load_config(CONFIG_PATH))


class TestArms:
    def test_four_arms(self):
        arms = benchmarks.comparison_arms(Hyperparams(tau=0.75))
        assert [(method, hp.tau) for method, hp in arms] == [
            ("pin_twsvmpi", 0.75),
            ("pin_twsvm", 0.75),
            ("twsvmpi", 0.0),
            ("pin_twsvm", 0.0),
        ]

    def test_hinge_default_falls_back(self):
        arms = benchmarks.comparison_arms(Hyperparams(tau=0.0))
        assert arms[0][1].tau == 0.5


class TestSuites:
    def test_blobs(self, settings):
        rows = benchmarks.blobs_suite(settings, seeds=[0], n=30)
        assert len(rows) == 4
        for row in rows:
            assert row["suite"] == "blobs"
            assert 0.0 <= row["accuracy"] <= 1.0
            assert row["train_seconds"] >= 0.0

    def test_noise_summary(self, settings):
        rows, summary = benchmarks.noise_suite(settings, seeds=[0, 1], rates=(0.0, 0.2), n=30)
        assert len(rows) == 2 * 2 * 4
        assert len(summary) == 2 * 4
        assert all(entry["runs"] == 2 for entry in summary)
        assert {entry["flip_rate"] for entry in summary} == {0.0, 0.2}

    def test_speed_objectives_agree(self, settings):
        row = benchmarks.speed_suite(settings, m=15, seed=1)[0]
        assert row["n"] >= 4 * 15
        oracle = row["oracle_objective"]
        assert abs(row["decomposition_objective"] - oracle) <= 1e-3 * (1.0 + abs(oracle))

    def test_unknown_suite(self, settings):
        with pytest.raises(ConfigError):
            benchmarks.run_suite("mnist", settings, [0])

    def test_dataset_suite_needs_data(self, settings):
        with pytest.raises(ConfigError, match="--data"):
            benchmarks.run_suite("dataset", settings, [0])

    def test_dataset_suite(self, settings):
        from src.synthetic import binary_blobs

        small = replace(settings, grid=replace(settings.grid, c1=(1.0,), tau=(0.5,)), folds=2)
        rows = benchmarks.run_suite("dataset", small, [0], binary_blobs(n=30, seed=5))["dataset"]
        assert [row["method"] for row in rows] == ["pin_twsvmpi", "pin_twsvm", "twsvmpi"]


class TestWriteTable:
    def test_union_of_columns(self, tmp_path):
        path = tmp_path / "table.tsv"
        benchmarks.write_table([{"a": 1, "b": 2}, {"a": 3, "c": 4}], path)
        with path.open(encoding="utf-8") as handle:
            rows = list(csv.reader(handle, delimiter="\t"))
        assert rows == [["a", "b", "c"], ["1", "2", ""], ["3", "", "4"]]

    def test_custom_delimiter(self, tmp_path):
        path = tmp_path / "table.csv"
        benchmarks.write_table([{"x": 0.5}], path, delimiter=",")
        assert path.read_text(encoding="utf-8") == "x\n0.5\n"


@pytest.mark.slow
class TestBandedTargets:
    def test_pinball_holds_up_under_label_noise(self, settings):
        _, summary = benchmarks.noise_suite(settings, seeds=range(20), rates=(0.1,))
        means = {(entry["method"], entry["tau"]): entry["mean_accuracy"] for entry in summary}
        assert means[("pin_twsvm", 0.5)] >= means[("pin_twsvm", 0.0)] - 0.005
        assert all(entry["runs"] == 20 for entry in summary)

    def test_iris_rbf_cross_validation(self, settings):
        row = benchmarks.iris_suite(settings)[0]
        assert row["k"] == 5
        assert row["mean_accuracy"] >= 0.94

    def test_decomposition_beats_oracle_at_250_per_class(self, settings):
        row = benchmarks.speed_suite(settings, m=250, seed=0)[0]
        oracle = row["oracle_objective"]
        assert abs(row["decomposition_objective"] - oracle) <= 1e-6 * (1.0 + abs(oracle))
        assert row["decomposition_seconds"] < row["oracle_seconds"]
        assert row["ratio"] < 1.0

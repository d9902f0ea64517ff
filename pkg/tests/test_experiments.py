import json

import numpy as np
import pytest

from pufferkit import (
    DatasetSpec,
    ExperimentConfig,
    IngestionError,
    builtin_config,
    emit_outputs,
    load_config,
    run_experiment,
)
from pufferkit.experiments import RESULT_HEADER

from conftest import make_instance


TABLE1_W1_ROW = (10.00, 5.00, 3.33, 2.50, 2.00, 1.67, 1.43, 1.25, 1.11, 1.00)
TABLE1_ALG_ROW = (0.78, 0.54, 0.44, 0.39, 0.35, 0.33, 0.31, 0.29, 0.28, 0.26)


class TestConfigValidation:
    def test_unknown_mechanism(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                name="x", mechanisms=("magic",), instance=make_instance([1.0], [1.0])
            )

    def test_empty_mechanisms_error_before_any_file(self, tmp_path):
        with pytest.raises(ValueError):
            ExperimentConfig(
                name="x", mechanisms=(), instance=make_instance([1.0], [1.0])
            )
        assert list(tmp_path.iterdir()) == []

    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                name="x", epsilon_grid=(0.5, 0.5), instance=make_instance([1.0], [1.0])
            )

    def test_grid_must_be_positive(self):
        with pytest.raises(ValueError):
            ExperimentConfig(
                name="x", epsilon_grid=(0.0, 1.0), instance=make_instance([1.0], [1.0])
            )

    def test_needs_a_source(self):
        with pytest.raises(ValueError):
            ExperimentConfig(name="x")


class TestRunExperiment:
    def test_table1_rows(self):
        table = run_experiment(builtin_config("table1"))
        np.testing.assert_allclose(table.theta["l1"], TABLE1_W1_ROW, atol=0.005)
        np.testing.assert_allclose(table.theta["w1"], TABLE1_W1_ROW, atol=0.005)
        np.testing.assert_allclose(table.theta["relaxed"], TABLE1_ALG_ROW, atol=0.01)

    def test_table2_rows(self):
        table = run_experiment(builtin_config("table2"))
        grid = np.asarray(table.epsilon_grid)
        np.testing.assert_allclose(table.theta["l1"], 3.0 / grid, atol=1e-9)
        np.testing.assert_allclose(table.theta["w1"], 3.0 / grid, atol=1e-9)
        np.testing.assert_allclose(table.theta["relaxed"], 1.0 / grid, atol=0.01)

    def test_identical_priors_single_budget(self):
        config = ExperimentConfig(
            name="flat",
            epsilon_grid=(1.0,),
            instance=make_instance([0.25, 0.25, 0.5], [0.25, 0.25, 0.5]),
        )
        table = run_experiment(config)
        assert table.theta["w1"] == (0.0,)
        assert table.theta["relaxed"] == (0.0,)
        assert table.theta["l1"] == (2.0,)

    def test_table1_reduction_range(self):
        table = run_experiment(builtin_config("table1"))
        reductions = table.reduction_vs_w1_pct
        assert reductions[0] == pytest.approx(92.2, abs=0.1)  # tightest budget
        assert reductions[-1] == pytest.approx(73.5, abs=0.1)  # loosest budget

    def test_subset_of_mechanisms(self):
        config = ExperimentConfig(
            name="w1only",
            epsilon_grid=(0.5, 1.0),
            mechanisms=("w1",),
            instance=make_instance([0.52, 0.48], [0.5, 0.5]),
        )
        table = run_experiment(config)
        assert set(table.theta) == {"w1"}
        assert table.reduction_vs_w1_pct is None
        assert table.delta() is None

    def test_missing_dataset_file_propagates_with_context(self, tmp_path):
        config = builtin_config("student", data_dir=tmp_path)
        with pytest.raises(IngestionError, match="student"):
            run_experiment(config)


class TestEmitOutputs:
    def test_csv_header_and_rerun_identical(self, tmp_path):
        table = run_experiment(builtin_config("table1"))
        (path,) = emit_outputs(table, "csv", tmp_path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(RESULT_HEADER)
        assert len(lines) == 11
        first = path.read_bytes()
        emit_outputs(table, "csv", tmp_path)
        assert path.read_bytes() == first

    def test_json_full_precision(self, tmp_path):
        table = run_experiment(builtin_config("table1"))
        (path,) = emit_outputs(table, "json", tmp_path)
        doc = json.loads(path.read_text())
        assert doc["rows"][0]["epsilon"] == 0.1
        assert abs(doc["rows"][-1]["theta_relaxed"] - 0.2643255931621959) < 1e-12

    def test_plotdata_same_columns(self, tmp_path):
        table = run_experiment(builtin_config("table2"))
        (path,) = emit_outputs(table, "plotdata", tmp_path)
        assert path.name == "table2.plot.csv"
        assert path.read_text().splitlines()[0] == ",".join(RESULT_HEADER)

    def test_unknown_format(self, tmp_path):
        table = run_experiment(builtin_config("table1"))
        with pytest.raises(ValueError):
            emit_outputs(table, "xml", tmp_path)


class TestConfigFile:
    def test_inline_roundtrip(self, tmp_path):
        doc = {
            "name": "inline",
            "epsilon_grid": [0.5, 1.0],
            "mechanisms": ["w1", "relaxed"],
            "scenarios": [
                {"rho": "r0", "s_i": "a", "s_j": "b", "p_i": [0.52, 0.48], "p_j": [0.5, 0.5]}
            ],
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        config = load_config(path)
        table = run_experiment(config)
        assert table.theta["relaxed"][1] == pytest.approx(0.2643, abs=1e-3)

    def test_dataset_config(self, tmp_path):
        csv_path = tmp_path / "toy.csv"
        rows = ["s,x"] + ["a,0"] * 6 + ["a,1"] * 4 + ["b,0"] * 5 + ["b,1"] * 5
        csv_path.write_text("\n".join(rows) + "\n")
        doc = {
            "name": "toy",
            "epsilon_grid": [1.0],
            "datasets": [
                {
                    "path": str(csv_path),
                    "sensitive_col": "s",
                    "public_col": "x",
                    "secret_pair": ["a", "b"],
                    "rho": "toy",
                }
            ],
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(doc))
        table = run_experiment(load_config(path))
        assert table.theta["l1"] == (1.0,)
        assert table.ingestion[0]["rows_used"] == {"a": 10, "b": 10}
        assert table.ingestion[0]["encoding"]["table"] == {"0": 0, "1": 1}

    def test_builtin_names(self):
        for name in ("table1", "table2", "student", "census", "bank"):
            config = builtin_config(name, data_dir="/nonexistent")
            assert config.name == name
        with pytest.raises(ValueError):
            builtin_config("nope")

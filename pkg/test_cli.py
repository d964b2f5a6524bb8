"""
End-to-end tests for the command-line interface and the JSON file formats
"""
import csv
import io
import json
import logging
import math

import pytest

from controllers.analysis import CONTINUITY_TUPLES
from controllers.helstrom import Ensemble
from controllers.zoo import ZooController
from helpers.exceptions import EXIT_BAD_INPUT, EXIT_OK
from main import main
from middlewares.options import configure_logging
from models.storage import EnsembleStore, ModelStore


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_gen_writes_a_loadable_model(tmp_path, capsys):
    path = tmp_path / "pentagon.json"
    code, out = run(capsys, "gen", "polygon", "--k", "5", "--out", str(path))
    assert code == EXIT_OK
    assert out == ""
    model = ModelStore.load_model(path)
    assert model.n_vertices == 5
    assert model.name == "polygon-5"
    assert len(model.symmetry) == 2


def test_gen_to_stdout(capsys):
    code, out = run(capsys, "gen", "simplex", "--d", "3")
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["dim"] == 2
    # lexicographic vertex order
    assert record["vertices"] == [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]


def test_analyze_pentagon(capsys):
    code, out = run(capsys, "analyze", "pentagon")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["n"] == pytest.approx(math.sqrt(5.0), abs=1e-7)
    assert report["m"] == pytest.approx(1.0 / math.cos(math.pi / 5), abs=1e-7)
    assert report["d"] == 2
    assert report["passed"]
    assert not report["point_symmetric"]
    assert "wall_clock" not in report
    assert report["model"]["n_vertices"] == 5


def test_analyze_is_deterministic(capsys):
    _, first = run(capsys, "analyze", "square")
    _, second = run(capsys, "analyze", "square")
    assert first == second


def test_analyze_cube_is_point_symmetric(capsys):
    code, out = run(capsys, "analyze", "cube", "--timing")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["point_symmetric"]
    assert report["wall_clock"] >= 0.0


def test_analyze_a_model_file(tmp_path, capsys):
    path = ModelStore.save_model(ZooController.simplex(4), tmp_path / "models" / "classical.json")
    code, out = run(capsys, "analyze", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["n"] == pytest.approx(4.0, abs=1e-9)


def test_nstore_of_a_subfamily(capsys):
    code, out = run(capsys, "nstore", "pentagon", "--states", "0,2")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["family"] == [0, 2]
    assert report["n"] == pytest.approx(2.0, abs=1e-9)


def test_nstore_rejects_bad_indices(capsys):
    code, _ = run(capsys, "nstore", "pentagon", "--states", "0,9")
    assert code == EXIT_BAD_INPUT


def test_minkowski(capsys):
    code, out = run(capsys, "minkowski", "polygon-3")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["m"] == pytest.approx(2.0, abs=1e-9)
    assert report["critical_state"] == pytest.approx([0.0, 0.0], abs=1e-6)


def test_dmax(capsys):
    code, out = run(capsys, "dmax", "bit", "0", "1")
    assert code == EXIT_OK
    assert json.loads(out)["bits"] == "inf"
    code, out = run(capsys, "dmax", "bit", "0", "0.5")
    assert json.loads(out)["bits"] == pytest.approx(1.0, abs=1e-9)


def test_helstrom_ensemble_file(tmp_path, capsys):
    model = ZooController.simplex(2)
    ModelStore.save_model(model, tmp_path / "bit.json")
    ensemble = Ensemble([model.vertex(0), model.centroid], [0.5, 0.5])
    record = EnsembleStore.ensemble_to_file("bit.json", ensemble, model)
    assert record.states[0] == 0
    path = tmp_path / "pair.json"
    path.write_text(record.model_dump_json())

    code, out = run(capsys, "helstrom", str(path))
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["ratio"] == pytest.approx(0.75, abs=1e-9)
    assert report["success_prob"] == pytest.approx(0.75, abs=1e-9)
    assert report["passed"]


def test_ensemble_file_with_a_zoo_model(tmp_path):
    path = tmp_path / "ensemble.json"
    path.write_text(json.dumps({"model": "pentagon", "states": [0, [0.0, 0.0]], "weights": [0.25, 0.75]}))
    model, ensemble = EnsembleStore.load_ensemble(path)
    assert model.name == "polygon-5"
    assert ensemble.states[1].affine == pytest.approx([0.0, 0.0])


def test_bad_ensemble_file(tmp_path, capsys):
    path = tmp_path / "ensemble.json"
    path.write_text(json.dumps({"model": "bit", "states": [0, 1], "weights": [1.0]}))
    code, _ = run(capsys, "helstrom", str(path))
    assert code == EXIT_BAD_INPUT


def test_sweep_csv(capsys):
    code, out = run(capsys, "sweep", "polygon", "--start", "3", "--stop", "6")
    assert code == EXIT_OK
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["parameter", "m", "n", "d", "c_lb"]
    assert [int(r[0]) for r in rows[1:]] == [3, 4, 5, 6]
    assert float(rows[1][1]) == pytest.approx(2.0, abs=1e-9)
    assert float(rows[2][1]) == pytest.approx(1.0, abs=1e-9)


def test_empty_sweep_is_bad_input(capsys):
    code, _ = run(capsys, "sweep", "simplex", "--start", "5", "--stop", "3")
    assert code == EXIT_BAD_INPUT


def test_verify_measure_identity(capsys):
    code, out = run(capsys, "verify", "theorem1", "--count", "3", "--seed", "0")
    assert code == EXIT_OK
    summaries = json.loads(out)
    assert len(summaries) == 1
    assert summaries[0]["instances"] == 3
    assert summaries[0]["max_deviation"] <= 1e-6


def test_verify_continuity(capsys):
    code, out = run(capsys, "verify", "continuity", "--count", "2", "--seed", "4")
    assert code == EXIT_OK
    assert json.loads(out)[0]["passed"]


def test_continuity_bound_over_a_thousand_tuples(capsys):
    code, out = run(capsys, "verify", "continuity", "--count", "100", "--seed", "11")
    summary = json.loads(out)[0]
    assert code == EXIT_OK
    # ten (state, effect, perturbation) tuples per model
    assert summary["instances"] * CONTINUITY_TUPLES == 1000
    assert summary["passed"]
    assert all(check["passed"] for check in summary["checks"])


def test_verify_count_must_be_positive(capsys):
    code, _ = run(capsys, "verify", "chain", "--count", "0")
    assert code == EXIT_BAD_INPUT


def test_unknown_model_is_bad_input(capsys):
    code, out = run(capsys, "analyze", "dodecahedron")
    assert code == EXIT_BAD_INPUT
    assert out == ""


def test_missing_file_is_bad_input(tmp_path, capsys):
    code, _ = run(capsys, "helstrom", str(tmp_path / "missing.json"))
    assert code == EXIT_BAD_INPUT


def test_tolerance_option(capsys, restore_settings):
    code, _ = run(capsys, "minkowski", "square", "--tol", "1e-10")
    assert code == EXIT_OK
    assert restore_settings.LP_TOL == 1e-10
    code, _ = run(capsys, "minkowski", "square", "--tol", "-1")
    assert code == EXIT_BAD_INPUT


def test_malformed_model_file(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps({"name": "broken", "dim": 2, "vertices": [[0.0, 0.0], [1.0]]}))
    code, _ = run(capsys, "analyze", str(path))
    assert code == EXIT_BAD_INPUT


def test_saved_model_is_canonical(tmp_path):
    model = ZooController.regular_polygon(6)
    first = ModelStore.save_model(model, tmp_path / "a.json").read_text()
    second = ModelStore.save_model(ModelStore.load_model(tmp_path / "a.json"), tmp_path / "b.json").read_text()
    assert first == second
    assert first.endswith("\n")
    assert ModelStore.model_hash(model) == ModelStore.model_hash(ModelStore.load_model(tmp_path / "a.json"))


def test_debug_setting_turns_on_debug_logs(capsys, restore_settings):
    restore_settings.DEBUG = True
    try:
        assert main(["minkowski", "square"]) == EXIT_OK
        assert logging.getLogger().level == logging.DEBUG
        assert "DEBUG controllers.zoo: Building zoo model square" in capsys.readouterr().err
        code, _ = run(capsys, "minkowski", "square", "--log-level", "ERROR")
        assert logging.getLogger().level == logging.ERROR
    finally:
        configure_logging("WARNING")

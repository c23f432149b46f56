import json

import numpy as np
import pytest

from conicgames import catalog
from conicgames.cli import EXIT_CAP, EXIT_OK, EXIT_PARSE, EXIT_PRECONDITION, dumps, main
from conicgames.corrsets import random_signaling_correlation, save_correlation
from conicgames.gamecore import Scenario, save_game


@pytest.fixture(scope="module")
def examples(tmp_path_factory):
    directory = tmp_path_factory.mktemp("examples")
    catalog.write_example_files(directory)
    return directory


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


class TestDumps:
    def test_seventeen_significant_digits(self):
        text = dumps({"x": np.cos(np.pi / 8) ** 2})
        assert "0.85355339059327373" in text

    def test_round_trips_exactly(self):
        values = [0.1, 1 / 3, np.pi, 1e-300, 123456.789]
        parsed = json.loads(dumps({"v": values}))
        assert parsed["v"] == values

    def test_deterministic(self):
        payload = {"a": [1.0, 2.5], "b": {"c": True, "d": None}}
        assert dumps(payload) == dumps(payload)


class TestValueCommand:
    def test_chsh_all_json(self, capsys, examples):
        code, out = run(capsys, "value", examples / "chsh.json", "all")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["values"]["classical"] == 0.75
        assert report["values"]["unrestricted"] == 1.0
        assert abs(report["values"]["dnn"] - 0.8535534) <= 1e-4
        assert abs(report["values"]["sdp1"] - 0.8535534) <= 1e-4
        assert abs(report["values"]["nosignaling"] - 1.0) <= 1e-5
        assert all(row["ok"] for row in report["chain"])
        assert report["certificate"]["verified"] is True
        assert report["config"]["tol"] == 1e-7

    def test_chsh_table_marks(self, capsys, examples):
        code, out = run(capsys, "--format", "table", "value", examples / "chsh.json", "all")
        assert code == EXIT_OK
        assert "OK" in out and "VIOLATED" not in out
        assert "0.853553" in out

    def test_single_set(self, capsys, examples):
        code, out = run(capsys, "value", examples / "allwin.json", "classical")
        assert code == EXIT_OK
        assert json.loads(out)["values"]["classical"] == 1.0

    def test_bad_file_names_field(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"nS": 2, "nT": 2, "nA": 2, "nB": 2, "pi": [[0.5, 0.5], [0.5, 0.5]], "V": 3}')
        code = main(["value", str(bad), "classical"])
        assert code == EXIT_PARSE

    def test_missing_file(self, capsys):
        assert main(["value", "nope.json", "classical"]) == EXIT_PARSE

    def test_cap_exit(self, capsys, tmp_path):
        g = catalog.allwin_game(Scenario(13, 1, 2, 2))
        path = tmp_path / "wide.json"
        save_game(g, path)
        assert main(["value", str(path), "classical"]) == EXIT_CAP


class TestMemberCommand:
    def test_prbox_verdicts(self, capsys, examples):
        for which, expected in (("nosignaling", "IN"), ("dnn", "OUT"), ("npa1", "OUT")):
            code, out = run(capsys, "member", examples / "prbox.json", which)
            assert code == EXIT_OK
            assert json.loads(out)["status"] == expected

    def test_deterministic_classical(self, capsys, tmp_path):
        from conicgames.gamecore import deterministic_correlation
        p = deterministic_correlation(Scenario(2, 2, 2, 2), [0, 1], [1, 0])
        path = tmp_path / "det.json"
        save_correlation(p, path)
        code, out = run(capsys, "member", path, "classical")
        assert code == EXIT_OK and json.loads(out)["status"] == "IN"

    def test_signaling_npa1_is_precondition_error(self, capsys, tmp_path):
        p = random_signaling_correlation(Scenario(2, 2, 2, 2), np.random.default_rng(5))
        path = tmp_path / "sig.json"
        save_correlation(p, path)
        assert main(["member", str(path), "npa1"]) == EXIT_PRECONDITION

    def test_witness_file(self, capsys, examples, tmp_path):
        wpath = tmp_path / "w.json"
        code, out = run(capsys, "member", examples / "prbox.json", "dnn",
                        "--witness", wpath)
        assert code == EXIT_OK
        data = json.loads(wpath.read_text())
        assert data["n"] == 8 and len(data["X"]) == 8


class TestGraphCommand:
    def test_chromatic(self, capsys, examples):
        code, out = run(capsys, "graph", examples / "c5.json", "chromatic")
        assert code == EXIT_OK and json.loads(out)["chromatic_number"] == 3

    def test_independence(self, capsys, examples):
        code, out = run(capsys, "graph", examples / "c5.json", "independence")
        assert code == EXIT_OK and json.loads(out)["independence_number"] == 2

    def test_qbound_fixed_k(self, capsys, examples):
        code, out = run(capsys, "graph", examples / "c5.json", "qbound", "--k", 3)
        assert code == EXIT_OK and json.loads(out)["verdict"] == "FEASIBLE"
        code, out = run(capsys, "graph", examples / "k2.json", "qbound", "--k", 1)
        assert code == EXIT_OK and json.loads(out)["verdict"] == "INFEASIBLE"

    def test_qbound_sweep_reports_smallest_feasible(self, capsys, examples):
        code, out = run(capsys, "graph", examples / "c5.json", "qbound")
        report = json.loads(out)
        assert code == EXIT_OK and report["k"] == 3
        verdicts = [row["verdict"] for row in report["sweep"]]
        assert verdicts == ["INFEASIBLE", "INFEASIBLE", "FEASIBLE"]


class TestCspCommand:
    def test_sat(self, capsys, examples):
        code, out = run(capsys, "csp", examples / "triangle2col.json", "sat")
        assert code == EXIT_OK and json.loads(out)["satisfiable"] is False

    def test_game_sat_cross_check(self, capsys, examples):
        code, out = run(capsys, "csp", examples / "triangle2col.json", "game-sat")
        report = json.loads(out)
        assert code == EXIT_OK
        assert report["game_satisfiable"] is False
        assert report["cross_check"] == "OK"

    def test_binarize_writes_file(self, capsys, examples, tmp_path):
        out_path = tmp_path / "binary.json"
        code, _ = run(capsys, "csp", examples / "triangle2col.json", "binarize",
                      "--out", out_path)
        assert code == EXIT_OK
        from conicgames.syncgraph import load_csp
        assert load_csp(out_path).variables == 3

    def test_compile_writes_game(self, capsys, examples, tmp_path):
        out_path = tmp_path / "game.json"
        code, _ = run(capsys, "csp", examples / "triangle2col.json", "compile",
                      "--out", out_path)
        assert code == EXIT_OK
        from conicgames.gamecore import load_game
        g = load_game(out_path)
        assert g.scenario.nS == 3


class TestDeterminism:
    def test_identical_reports(self, examples, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        for out in (out1, out2):
            assert main(["--output", str(out), "--seed", "7",
                         "value", str(examples / "chsh.json"), "all"]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_config_embedded(self, capsys, examples):
        code, out = run(capsys, "--seed", "9", "member", examples / "prbox.json",
                        "nosignaling")
        assert json.loads(out)["config"]["seed"] == 9


class TestExamplesCommand:
    def test_writes_expected_files(self, capsys, tmp_path):
        code, out = run(capsys, "--format", "table", "examples", "--dir",
                        tmp_path / "ex")
        assert code == EXIT_OK
        names = {line.rsplit("/", 1)[-1] for line in out.strip().splitlines()}
        assert {"chsh.json", "prbox.json", "c5.json", "triangle2col.json"} <= names

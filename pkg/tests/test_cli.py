import json

import pytest

from ..core.sdp.sdpa_io import import_sdpa
from ..core.storage.result_store import ResultDocument
from ..main import EXIT_CONFIG, EXIT_OK, build_parser, main


@pytest.fixture
def toy_config(tmp_path, toy_config_text):
    path = tmp_path / "toy.toml"
    path.write_text(toy_config_text, encoding="utf-8")
    return path


@pytest.fixture
def toy_result(tmp_path, toy_config):
    out = tmp_path / "toy_result.json"
    assert main(["solve", "--config", str(toy_config), "--out", str(out)]) == EXIT_OK
    return out


class TestSolve:
    def test_writes_result_and_prints_path(self, tmp_path, toy_config, capsys):
        out = tmp_path / "result.json"
        code = main(["solve", "--config", str(toy_config), "--out", str(out)])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == str(out)
        document = ResultDocument.load(out)
        assert document.all_succeeded
        assert [r.k for r in document.records] == [2]

    def test_invalid_discount(self, tmp_path, toy_config_text, capsys):
        path = tmp_path / "bad.toml"
        text = toy_config_text.replace('time = "continuous"', 'time = "discrete"')
        path.write_text(text.replace("discount = 1.0", "discount = 1.5"), encoding="utf-8")
        assert main(["solve", "--config", str(path), "--out", str(tmp_path / "r.json")]) == EXIT_CONFIG
        assert capsys.readouterr().out == ""
        assert not (tmp_path / "r.json").exists()

    def test_missing_config(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "none.toml")]) == EXIT_CONFIG

    def test_config_required(self):
        assert main(["solve"]) == EXIT_CONFIG

    def test_override(self, tmp_path, toy_config):
        out = tmp_path / "odd.json"
        code = main(
            ["solve", "--config", str(toy_config), "--out", str(out), "--override", "tightening.degrees=[3]"]
        )
        assert code == EXIT_CONFIG


class TestResultVerbs:
    def test_certify(self, toy_result):
        before = ResultDocument.load(toy_result)
        assert main(["certify", "--result", str(toy_result), "--samples", "300", "--seed", "3"]) == EXIT_OK
        after = ResultDocument.load(toy_result)
        assert after.records[0].approximation.w == before.records[0].approximation.w
        assert after.records[0].approximation.certification.sample_count == 300

    def test_volume(self, tmp_path, toy_result):
        out = tmp_path / "volume.json"
        assert main(["volume", "--result", str(toy_result), "--out", str(out)]) == EXIT_OK
        data = json.loads(out.read_text(encoding="utf-8"))
        assert data["sample_count"] == 1000
        assert data["seed"] == 5
        assert 0.0 <= data["volume_estimate"] <= 2.0

    def test_volume_set_and_samples(self, tmp_path, toy_result):
        out = tmp_path / "volume_yk.json"
        args = ["volume", "--result", str(toy_result), "--out", str(out), "--set", "yk", "--samples", "200"]
        assert main(args) == EXIT_OK
        assert json.loads(out.read_text(encoding="utf-8"))["sample_count"] == 200

    def test_volume_missing_degree(self, toy_result):
        assert main(["volume", "--result", str(toy_result), "--degree", "6"]) == EXIT_CONFIG

    def test_grid(self, tmp_path, toy_result):
        out = tmp_path / "grid.csv"
        assert main(["grid", "--result", str(toy_result), "--out", str(out)]) == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "x,w,v_min,in_X,in_Xk,in_Yk"
        assert len(lines) == 6
        assert lines[1].startswith("-1.0,")

    def test_result_required(self):
        assert main(["grid"]) == EXIT_CONFIG

    def test_missing_result(self, tmp_path):
        assert main(["volume", "--result", str(tmp_path / "missing.json")]) == EXIT_CONFIG


class TestConfigVerbs:
    def test_simulate(self, tmp_path, toy_config):
        out = tmp_path / "trajectory.csv"
        assert main(["simulate", "--config", str(toy_config), "--out", str(out)]) == EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t,x"
        assert len(lines) == 51

    def test_simulate_outside_X(self, tmp_path, toy_config):
        args = ["simulate", "--config", str(toy_config), "--override", "simulate.initial_state=[2.0]"]
        assert main(args + ["--out", str(tmp_path / "t.csv")]) == EXIT_CONFIG

    def test_simulate_divergence(self, tmp_path, toy_config):
        # 第一步 RK4 的中间量即溢出
        args = ["simulate", "--config", str(toy_config), "--override", 'system.field=["1e160*x^2"]']
        out = tmp_path / "t.csv"
        assert main(args + ["--out", str(out)]) == EXIT_CONFIG
        assert not out.exists()

    def test_export_sdpa(self, tmp_path, toy_config):
        out = tmp_path / "toy.dat-s"
        assert main(["export-sdpa", "--config", str(toy_config), "--out", str(out)]) == EXIT_OK
        problem = import_sdpa(out)
        assert problem.constraint_count == 12
        assert problem.free_count == 9

    def test_bundled_config_by_name(self, tmp_path):
        out = tmp_path / "henon.dat-s"
        args = ["export-sdpa", "--config", "henon", "--degree", "4", "--out", str(out)]
        assert main(args) == EXIT_OK
        assert out.read_text(encoding="utf-8").splitlines()[1].strip() != ""


def test_unknown_verb():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["plot"])

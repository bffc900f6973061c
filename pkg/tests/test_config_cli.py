import os

import numpy as np
import pytest
import yaml

from nhpd.cli import main
from nhpd.config import adjusted_strength, load_config, strength_ratio
from nhpd.errors import ConfigError
from nhpd.mesh import write_msh
from nhpd.meshgen import square_mesh


@pytest.fixture
def scenario(tmp_path):
    mesh = square_mesh(side=1.0, spacing=0.2, seed=3)
    mesh_path = tmp_path / "square.msh"
    write_msh(mesh, mesh_path)
    cfg = {
        "mesh": "square.msh",
        "material": {"E": 30.0e9, "nu": 0.2, "Ft": 3.81e6},
        "model": {"lambda": 3.0, "correction": {"max_iterations": 3000}},
        "boundaries": [
            {"group": "left", "dof": "ux", "increment": 0.0},
            {"group": "left", "dof": "uy", "increment": 0.0},
            {"group": "right", "dof": "uy", "increment": 0.0},
            {"group": "right", "dof": "ux", "increment": 2.0e-5},
        ],
        "program": {"steps": 4, "batch_size": 5},
        "monitor": {"group": "right", "dof": "ux"},
        "output": {"directory": "out", "field_interval": 2, "reference_load": 598.47e3},
        "sweep": {"lambdas": [2.5, 3.0, 3.5], "adjust_strength": True},
    }
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg))
    return tmp_path, cfg_path, cfg


class TestLoadConfig:
    def test_defaults_recorded(self, scenario):
        _, cfg_path, _ = scenario
        cfg = load_config(cfg_path)
        assert cfg.correction.probe_strain == pytest.approx(1e-3)
        assert cfg.program.energy_tolerance == pytest.approx(1e-4)
        assert cfg.program.batch_size == 5
        eff = cfg.effective_dict()
        assert eff["program"]["energy_tolerance"] == pytest.approx(1e-4)
        assert eff["model"]["correction"]["probe_strain"] == pytest.approx(1e-3)

    def test_lambda_below_one_rejected(self, scenario):
        tmp_path, cfg_path, raw = scenario
        raw["model"]["lambda"] = 0.5
        cfg_path.write_text(yaml.safe_dump(raw))
        with pytest.raises(ConfigError, match="lambda"):
            load_config(cfg_path)

    def test_missing_key_named(self, scenario):
        tmp_path, cfg_path, raw = scenario
        del raw["material"]["E"]
        cfg_path.write_text(yaml.safe_dump(raw))
        with pytest.raises(ConfigError, match="material.E"):
            load_config(cfg_path)

    def test_string_floats_accepted(self, scenario):
        tmp_path, cfg_path, raw = scenario
        raw["material"]["E"] = "30.0e9"
        cfg_path.write_text(yaml.safe_dump(raw))
        assert load_config(cfg_path).material.E == pytest.approx(30e9)

    def test_mesh_path_resolved_relative_to_config(self, scenario):
        tmp_path, cfg_path, _ = scenario
        cfg = load_config(cfg_path)
        assert os.path.isabs(cfg.mesh)
        assert os.path.exists(cfg.mesh)


class TestStrengthLaw:
    def test_ratio_values(self):
        assert strength_ratio(3.0) == pytest.approx(1.0)
        assert strength_ratio(2.5) == pytest.approx(0.8125)
        assert strength_ratio(3.5) == pytest.approx(1.1875)

    def test_adjusted_strengths_match_reported_values(self):
        base = 3.81e6
        assert adjusted_strength(base, 2.5) == pytest.approx(4.69e6, rel=1e-3)
        assert adjusted_strength(base, 3.0) == pytest.approx(3.81e6)
        assert adjusted_strength(base, 3.5) == pytest.approx(3.21e6, rel=1e-3)


class TestCli:
    def test_info(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        assert main(["info", "--config", str(cfg_path)]) == 0
        out = capsys.readouterr().out
        assert "points:" in out and "bonds:" in out

    def test_unknown_group_exit_code(self, scenario, capsys):
        tmp_path, cfg_path, raw = scenario
        raw["boundaries"][0]["group"] = "nope"
        cfg_path.write_text(yaml.safe_dump(raw))
        code = main(["run", "--config", str(cfg_path)])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_missing_mesh_exit_code(self, scenario):
        tmp_path, cfg_path, raw = scenario
        raw["mesh"] = "missing.msh"
        cfg_path.write_text(yaml.safe_dump(raw))
        with pytest.raises(FileNotFoundError):
            main(["run", "--config", str(cfg_path)])

    def test_correct_writes_report(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        out = tmp_path / "corr_out"
        assert main(["correct", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "correction.csv").exists()
        text = (out / "correction.csv").read_text()
        assert "lambda=3" in text
        last_change = float(text.strip().splitlines()[-1].split(",")[1])
        assert last_change < 1e-3

    def test_run_outputs_and_reproducibility(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        out1 = tmp_path / "out1"
        assert main(["run", "--config", str(cfg_path), "--out", str(out1)]) == 0
        history1 = (out1 / "history.csv").read_text()
        assert (out1 / "effective_config.yaml").exists()
        assert (out1 / "fields_00002.vtk").exists()
        assert (out1 / "fields_00004.vtk").exists()
        assert "lambda=3" in history1 and "Ft=3.81e+06" in history1

        # replaying the effective snapshot reproduces the history bit for bit
        out2 = tmp_path / "out2"
        assert main(["run", "--config", str(out1 / "effective_config.yaml"), "--out", str(out2)]) == 0
        history2 = (out2 / "history.csv").read_text()
        assert history1 == history2

    def test_run_reports_normalized_peak(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        assert main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 0
        out = capsys.readouterr().out
        assert "peak |reaction|" in out
        assert "normalized peak" in out

    def test_sweep_adjusts_strength(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
        rows = (out / "summary.csv").read_text().strip().splitlines()
        assert "lambda=3" in rows[1]
        assert rows[2] == "lambda,Ft,peak,normalized_peak"
        got = {float(r.split(",")[0]): float(r.split(",")[1]) for r in rows[3:]}
        assert got[2.5] == pytest.approx(4.69e6, rel=1e-3)
        assert got[3.0] == pytest.approx(3.81e6)
        assert got[3.5] == pytest.approx(3.21e6, rel=1e-3)
        for lam in (2.5, 3.0, 3.5):
            sub = out / f"lam_{lam:g}"
            assert (sub / "history.csv").exists()
            assert (sub / "correction.csv").exists()

    def test_run_log_records_defaults(self, scenario):
        tmp_path, cfg_path, _ = scenario
        out = tmp_path / "logged"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        text = (out / "run.log").read_text()
        assert "effective configuration" in text
        assert "energy_tolerance: 0.0001" in text
        assert "probe_strain: 0.001" in text

    def test_info_bond_count_vs_lambda(self, scenario, capsys):
        tmp_path, cfg_path, _ = scenario
        assert main(["info", "--config", str(cfg_path)]) == 0
        out = capsys.readouterr().out
        assert "bond count vs lambda:" in out
        counts = {}
        for line in out.splitlines():
            if line.strip().startswith("lambda="):
                k, v = line.strip().split(": ")
                counts[float(k.split("=")[1])] = int(v)
        assert sorted(counts) == [2.5, 3.0, 3.5]
        assert counts[2.5] < counts[3.0] < counts[3.5]

    def test_partial_history_written_on_solver_failure(self, scenario, monkeypatch, capsys):
        from nhpd import cli as cli_mod
        from nhpd.errors import SingularSystemError
        from nhpd.solver import RunHistory, StepRecord

        tmp_path, cfg_path, _ = scenario
        out = tmp_path / "partial"
        partial = RunHistory(records=[StepRecord(1, 1e-5, -10.0, 3, 2e-4, 2, 1)])

        class FailingDriver:
            def __init__(self, model, program):
                self.model = model
                self.u = None

            def run(self, on_step=None):
                raise SingularSystemError("boom", history=partial)

        monkeypatch.setattr(cli_mod.solver_mod, "QuasiStatic", FailingDriver)
        code = main(["run", "--config", str(cfg_path), "--out", str(out)])
        assert code == 6
        assert "boom" in capsys.readouterr().err
        text = (out / "history.csv").read_text()
        assert text.strip().splitlines()[-1].startswith("1,")

    def test_elastic_history_is_linear(self, scenario):
        tmp_path, cfg_path, _ = scenario
        out = tmp_path / "lin"
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        rows = (out / "history.csv").read_text().strip().splitlines()[3:]
        data = np.array([[float(v) for v in r.split(",")] for r in rows])
        reaction = data[:, 2]
        steps = data[:, 0]
        ratio = reaction / steps
        assert np.abs(ratio / ratio[0] - 1.0).max() < 1e-8

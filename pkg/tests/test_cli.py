from __future__ import annotations

import json
import os

import numpy as np
import pytest
import yaml

from ckdv.analytic import sample_ic
from ckdv.cli import main, read_snapshot
from ckdv.config import load_config, scenario_presets


def write_config(tmp_path, name="scenario.yaml", **sections):
    base = {
        "scenario": "hs-soliton",
        "grid": {"h": 0.4},
        "time": {"t0": 0.25},
        "output": {"snapshot_every": 0.125, "diagnostics_every": 0.05},
    }
    for key, value in sections.items():
        if isinstance(value, dict) and key in base:
            base[key].update(value)
        else:
            base[key] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(base))
    return str(path)


class TestRunCommand:
    def test_successful_run_writes_artifacts(self, tmp_path):
        out = str(tmp_path / "out")
        code = main(["run", write_config(tmp_path), "--out", out])
        assert code == 0
        names = set(os.listdir(out))
        assert {"manifest.json", "snapshots.csv", "diagnostics.ndjson",
                "stability.json", "error_series.csv"} <= names
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert manifest["resolved"]["steps_completed"] > 0

    def test_initial_snapshot_matches_sampled_ic_exactly(self, tmp_path):
        out = str(tmp_path / "out")
        config_path = write_config(tmp_path)
        assert main(["run", config_path, "--out", out]) == 0
        cfg = load_config(config_path)
        grid = cfg.make_grid(tau=1.0)
        expected = sample_ic(cfg.ic, grid, cfg.system.n_modes)
        x, theta = read_snapshot(os.path.join(out, "snapshot_0000000000.csv"))
        np.testing.assert_array_equal(x, grid.x)
        np.testing.assert_array_equal(theta, expected.theta)

    def test_runs_are_byte_reproducible(self, tmp_path):
        config_path = write_config(tmp_path)
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        assert main(["run", config_path, "--out", out1]) == 0
        assert main(["run", config_path, "--out", out2]) == 0
        for name in sorted(os.listdir(out1)):
            if name == "manifest.json":
                a = json.loads(open(os.path.join(out1, name)).read())
                b = json.loads(open(os.path.join(out2, name)).read())
                # the timestamp and the varied output directory are the only
                # fields allowed to differ
                a.pop("created_utc"), b.pop("created_utc")
                a["config"]["output"].pop("directory")
                b["config"]["output"].pop("directory")
                assert a == b
            else:
                with open(os.path.join(out1, name), "rb") as fa, \
                        open(os.path.join(out2, name), "rb") as fb:
                    assert fa.read() == fb.read(), name

    def test_gate_failure_exits_3_without_stepping(self, tmp_path):
        out = str(tmp_path / "out")
        config_path = write_config(tmp_path, time={"t0": 0.25, "tau": 0.5})
        assert main(["run", config_path, "--out", out]) == 3
        assert not os.path.exists(os.path.join(out, "snapshots.csv"))

    def test_forced_unstable_divergence_exits_4_with_partial_outputs(self, tmp_path):
        out = str(tmp_path / "out")
        cap = 0.32**6 / (9 * 0.25 * 1.0)
        config_path = write_config(
            tmp_path,
            scenario="hs-soliton-A34",
            grid={"h": 0.32},
            time={"t0": 1.0, "tau": 100 * cap, "force_unstable": True},
            output={"snapshot_every": 0.05, "diagnostics_every": 0.05},
        )
        with pytest.warns(UserWarning):
            code = main(["run", config_path, "--out", out])
        assert code == 4
        manifest = json.loads(open(os.path.join(out, "manifest.json")).read())
        assert manifest["status"] == "diverged"
        assert os.path.exists(os.path.join(out, "snapshots.csv"))

    def test_config_error_exits_2(self, tmp_path):
        config_path = write_config(tmp_path, grid={"h": 0.3})
        assert main(["run", config_path]) == 2

    def test_manifest_config_reparses_to_equivalent_run(self, tmp_path):
        from ckdv.config import RunConfig

        out = str(tmp_path / "out")
        assert main(["run", write_config(tmp_path), "--out", out]) == 0
        manifest = json.loads(open(os.path.join(out, "manifest.json")).read())
        again = RunConfig.from_dict(manifest["config"])
        assert again.to_dict() == manifest["config"]

    def test_plots_emitted_on_request(self, tmp_path):
        out = str(tmp_path / "out")
        config_path = write_config(tmp_path)
        assert main(["run", config_path, "--out", out, "--plot"]) == 0
        plots = os.listdir(os.path.join(out, "plots"))
        assert any(p.startswith("profile_") and p.endswith(".svg") for p in plots)
        # the scenario has an exact solution, so pointwise error figures too
        assert any(p.startswith("error_0") and p.endswith(".svg") for p in plots)
        assert "error_vs_t.svg" in plots
        assert "conserved_vs_t.svg" in plots
        first = open(os.path.join(out, "plots", sorted(plots)[0])).read()
        assert first.startswith("<svg")


class TestCompareCommand:
    def test_identical_snapshots_compare_equal(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["run", write_config(tmp_path), "--out", out]) == 0
        snap = os.path.join(out, "snapshot_0000000000.csv")
        assert main(["compare", snap, snap]) == 0

    def test_different_snapshots_fail_at_zero_tolerance(self, tmp_path):
        out = str(tmp_path / "out")
        assert main(["run", write_config(tmp_path), "--out", out]) == 0
        index = [
            line.split(",") for line in
            open(os.path.join(out, "snapshots.csv")).read().splitlines()[1:]
        ]
        first = os.path.join(out, index[0][2])
        last = os.path.join(out, index[-1][2])
        assert main(["compare", first, last]) == 1
        assert main(["compare", first, last, "--tol", "1000.0"]) == 0


class TestConvergeCommand:
    def test_table_written(self, tmp_path):
        out = str(tmp_path / "out")
        config_path = write_config(tmp_path, time={"t0": 0.05})
        code = main(["converge", config_path, "--h-list", "0.8,0.4", "--out", out])
        assert code == 0
        lines = open(os.path.join(out, "convergence.csv")).read().splitlines()
        assert lines[0] == "h,tau,error_pct,order_estimate,diverged"
        assert len(lines) == 3
        errors = [float(line.split(",")[2]) for line in lines[1:]]
        assert errors[1] < errors[0]


class TestSweepCommand:
    def test_cross_product_runs_in_subdirectories(self, tmp_path):
        out = str(tmp_path / "sweep")
        config_path = write_config(tmp_path, time={"t0": 0.1})
        code = main([
            "sweep", config_path, "--out", out,
            "--vary", "ic.m=0.8,1.0", "--jobs", "2",
        ])
        assert code == 0
        subdirs = sorted(os.listdir(out))
        assert subdirs == ["m-0.8", "m-1.0"]
        for sub in subdirs:
            manifest = json.loads(open(os.path.join(out, sub, "manifest.json")).read())
            assert manifest["status"] == "ok"
        m_values = [
            json.loads(open(os.path.join(out, sub, "manifest.json")).read())
            ["config"]["ic"]["m"]
            for sub in subdirs
        ]
        assert m_values == [0.8, 1.0]

    def test_serial_sweep_matches(self, tmp_path):
        out = str(tmp_path / "sweep1")
        config_path = write_config(tmp_path, time={"t0": 0.1})
        code = main([
            "sweep", config_path, "--out", out,
            "--vary", "grid.h=0.4,0.5", "--jobs", "1",
        ])
        assert code == 0
        assert sorted(os.listdir(out)) == ["h-0.4", "h-0.5"]

    def test_bad_vary_spec_rejected(self, tmp_path):
        config_path = write_config(tmp_path)
        assert main(["sweep", config_path, "--vary", "nonsense"]) == 2

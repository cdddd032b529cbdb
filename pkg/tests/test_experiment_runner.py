#!/usr/bin/env python3
"""
ModLoc - modular localization numerical laboratory
Copyright (C) 2026 Jefferson Richards

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Affero General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU Affero General Public License for more details.

You should have received a copy of the GNU Affero General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""

"""
Test suite for the experiment runner, replay and the command line
"""

import json
import pytest
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import math
from pathlib import Path

import pandas as pd

from src import experiment_runner
from src.errors import CheckFailed, ConfigInvalid, Mismatch, OffGrid
from src.experiment_config import EXPERIMENTS, ExperimentConfig
from src.experiment_runner import (
    CHECKS, CheckSpec, ExperimentResult, RunManifest, WorkerPool, checks_for, evaluate_check, list_checks, replay,
    run,
)
from src.modular_net import LocalizationReport
from src.report_writer import load_checks, load_manifest


def gating_failures(manifest):
    return [c["name"] for c in manifest.failed_checks()]


class TestRegistry:

    def test_every_experiment_has_checks(self):
        """Each named experiment owns at least one check"""
        for name in EXPERIMENTS:
            assert checks_for(name), name

    def test_checks_belong_to_known_experiments(self):
        """Every check is reachable from exactly one experiment"""
        owners = {}
        for spec in CHECKS.values():
            assert spec.experiment in EXPERIMENTS
            owners.setdefault(spec.name, set()).add(spec.experiment)
        assert all(len(experiments) == 1 for experiments in owners.values())

    def test_list_checks(self):
        """The listing covers the registry with plain-language properties"""
        table = list_checks()
        assert len(table) == len(CHECKS)
        assert set(table["experiment"]) == set(EXPERIMENTS)
        assert table["property"].str.len().min() > 0

    def test_acceptance_checks_gate(self):
        """Localization trend, calibration, contrast and the wedge relations fail a run"""
        for name in ("localize.score_trend", "localize.calibration", "localize.contrast", "bw.isotony",
                     "bw.bw_residual", "bw.borchers", "bw.borchers_refinement"):
            assert CHECKS[name].gating, name
        assert CHECKS["localize.contrast"].comparator == "<"
        assert CHECKS["localize.contrast"].threshold == 0.5


class TestEvaluateCheck:

    def test_threshold_from_tolerance(self):
        """A missing threshold means the configured tolerance"""
        spec = CheckSpec("x", "lattice-verify", "demo")
        assert evaluate_check(spec, 1e-12, 1e-8).passed
        assert not evaluate_check(spec, 1e-6, 1e-8).passed
        assert evaluate_check(spec, 1e-12, 1e-8).threshold == 1e-8

    def test_comparators(self):
        """Lower bounds use >= and >"""
        assert evaluate_check(CheckSpec("x", "localize", "demo", 0.0, ">="), 0.0, 1e-8).passed
        assert not evaluate_check(CheckSpec("x", "localize", "demo", 0.0, ">"), 0.0, 1e-8).passed

    def test_missing_or_nan_fails(self):
        """Unmeasured or non-finite values never pass"""
        spec = CheckSpec("x", "lattice-verify", "demo", 1.0)
        assert not evaluate_check(spec, None, 1e-8).passed
        assert not evaluate_check(spec, float("nan"), 1e-8).passed
        assert math.isnan(evaluate_check(spec, None, 1e-8).value)


class TestWorkerPool:

    def test_order_preserved(self):
        """Threaded results come back in input order"""
        items = list(range(20))
        assert WorkerPool(workers=4).map(lambda x: x * x, items) == [x * x for x in items]

    def test_serial_pool(self):
        """One worker runs in the calling thread"""
        assert WorkerPool().map(str, [1, 2]) == ["1", "2"]

    def test_threaded_run_matches_serial(self, tmp_path):
        """The worker count does not change check values"""
        config = ExperimentConfig(experiment="lattice-verify", dim=3, families=3, seed=2, out_dir=str(tmp_path))
        serial = run(config, write=False, pool=WorkerPool(1))
        threaded = run(config, write=False, pool=WorkerPool(3))
        assert serial.manifest_hash() == threaded.manifest_hash()


class TestExperiments:

    def setup_method(self):
        """Setup test fixtures"""
        self.kwargs = {"seed": 7}

    def test_lattice_verify(self, tmp_path):
        """All identities of random standard subspaces pass"""
        config = ExperimentConfig(experiment="lattice-verify", dim=3, families=2, out_dir=str(tmp_path), **self.kwargs)
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        table = pd.read_csv(Path(manifest.run_dir) / "lattice-verify.csv")
        assert len(table) == 2

    def test_lattice_verify_with_trivial_meets(self, tmp_path):
        """Random families whose meets are {0} still verify the tensor identities"""
        config = ExperimentConfig(experiment="lattice-verify", dim=3, families=2, seed=2, out_dir=str(tmp_path))
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        checks = {c["name"]: c for c in manifest.checks}
        assert checks["lattice.tensor_meet"]["value"] < 1e-6

    def test_little_group(self, tmp_path):
        """Little group identities and cocycle plot data"""
        config = ExperimentConfig(experiment="little-group", grid=8, kappa=[0.0, 1.0], out_dir=str(tmp_path))
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        plot = pd.read_csv(Path(manifest.run_dir) / "plot_cocycles.csv")
        assert list(plot.columns) == ["i", "j", "A-id", "c"]

    def test_induce(self, tmp_path):
        """Exact grid elements and halving group law residuals"""
        config = ExperimentConfig(experiment="induce", grid=32, kappa=[1.0], out_dir=str(tmp_path))
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        assert (Path(manifest.run_dir) / "plot_group_law.csv").exists()

    def test_fock_verify(self, tmp_path):
        """Second quantization identities for two modes"""
        config = ExperimentConfig(experiment="fock-verify", dim=2, families=2, out_dir=str(tmp_path), **self.kwargs)
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        records = json.loads((Path(manifest.run_dir) / "fock.json").read_text(encoding="utf-8"))
        assert {"identity", "deviation", "n", "seed"} <= set(records[0])

    def test_counterexample(self, tmp_path):
        """Twisted boosts break the modular relation while the net stays covariant"""
        config = ExperimentConfig(experiment="counterexample", dim=3, seed=8, out_dir=str(tmp_path))
        manifest = run(config)
        assert manifest.passed, gating_failures(manifest)
        checks = {c["name"]: c for c in manifest.checks}
        assert checks["counter.separating_transfer"]["value"] == 1.0
        assert checks["counter.cyclicity_transfer"]["passed"]
        gaps = pd.read_csv(Path(manifest.run_dir) / "counterexample.csv")
        assert list(gaps.columns) == ["boost", "gap"]

    def test_localize_outputs(self, tmp_path):
        """One score row per kappa and the full wedge battery"""
        config = ExperimentConfig(experiment="localize", grid=16, kappa=[0.0, 1.0], out_dir=str(tmp_path))
        manifest = run(config)
        table = pd.read_csv(Path(manifest.run_dir) / "localize.csv")
        assert list(table.columns) == ["kappa", "grid", "n_wedges", "cutoff", "score", "min_principal_angle"]
        assert list(table["kappa"]) == [0.0, 1.0]
        assert table["score"].between(0.0, 1.0).all()
        names = [c["name"] for c in manifest.checks]
        assert sorted(names) == sorted(spec.name for spec in checks_for("localize"))

    def test_localize_fails_on_contrast(self, tmp_path, monkeypatch):
        """A flat score sweep fails the contrast check and the run"""
        scores = {0.0: 0.9842, 1.0: 0.8932, 5.0: 0.8322, 25.0: 0.7457}

        def fake_score(net, region, m=4):
            return LocalizationReport(kappa=net.rep.kappa, grid="16", n_wedges=m, cutoff=net.cutoff,
                                      score=scores[net.rep.kappa], min_principal_angle=0.1)

        monkeypatch.setattr(experiment_runner, "localization_score", fake_score)
        config = ExperimentConfig(experiment="localize", grid=16, kappa=[0.0, 1.0, 5.0, 25.0],
                                  out_dir=str(tmp_path))
        manifest = run(config)
        checks = {c["name"]: c for c in manifest.checks}
        assert checks["localize.contrast"]["value"] == pytest.approx(0.7577, abs=1e-4)
        assert checks["localize.contrast"]["gating"]
        assert not checks["localize.contrast"]["passed"]
        assert checks["localize.score_trend"]["passed"]
        assert manifest.status == "failed"

    def test_huygens(self, tmp_path):
        """Exact Hilbert identities and the support report with its refinement section"""
        config = ExperimentConfig(experiment="huygens", grid=16, out_dir=str(tmp_path))
        manifest = run(config)
        checks = {c["name"]: c for c in manifest.checks}
        for name in ("huygens.hilbert_squares", "huygens.hilbert_identity", "huygens.source_support"):
            assert checks[name]["passed"], name
        support = json.loads((Path(manifest.run_dir) / "support.json").read_text(encoding="utf-8"))
        assert "leakage_spacelike" in support
        assert {"spacelike_ratio", "timelike_ratio", "timelike_at_roundoff", "floor"} <= set(support["refinement"])
        assert checks["huygens.timelike_converged"]["gating"]
        trace = pd.read_csv(Path(manifest.run_dir) / "plot_huygens_trace.csv")
        assert set(trace["point"]) == {"center", "spacelike"}


class TestRun:

    def test_manifest_contents(self, tmp_path):
        """Every executed check appears exactly once in manifest and CSV"""
        config = ExperimentConfig(experiment="little-group", grid=8, kappa=[1.0], out_dir=str(tmp_path))
        manifest = run(config)
        stored = load_manifest(manifest.run_dir)
        names = [c["name"] for c in stored["checks"]]
        assert len(names) == len(set(names)) == len(checks_for("little-group"))
        assert list(load_checks(manifest.run_dir)["name"]) == names
        assert stored["config_hash"] == config.config_hash()
        assert stored["manifest_hash"] == manifest.manifest_hash()
        assert set(stored["platform"]) >= {"python", "numpy", "scipy", "pandas"}

    def test_invalid_config(self, tmp_path):
        """Validation runs before anything is written"""
        config = ExperimentConfig(experiment="localize", kappa=[], out_dir=str(tmp_path / "out"))
        with pytest.raises(ConfigInvalid):
            run(config)
        assert not (tmp_path / "out").exists()

    def test_strict_failure_writes_manifest(self, tmp_path, monkeypatch):
        """CheckFailed is raised after the manifest is written"""
        def failing(config, pool):
            return ExperimentResult(measurements={"little.full_turn": 1.0})

        monkeypatch.setitem(experiment_runner.EXPERIMENT_RUNNERS, "little-group", failing)
        config = ExperimentConfig(experiment="little-group", out_dir=str(tmp_path))
        with pytest.raises(CheckFailed) as info:
            run(config, strict=True)
        stored = load_manifest(info.value.details["run_dir"])
        assert stored["status"] == "failed"
        assert "little.full_turn" in info.value.details["failed"]

    def test_advisory_failure_keeps_status(self, tmp_path, monkeypatch):
        """Advisory checks outside threshold do not fail a run"""
        def measured(config, pool):
            values = {spec.name: 0.0 for spec in checks_for("induce")}
            values["induce.unitarity_refinement"] = 0.9
            return ExperimentResult(measurements=values)

        monkeypatch.setitem(experiment_runner.EXPERIMENT_RUNNERS, "induce", measured)
        manifest = run(ExperimentConfig(experiment="induce", out_dir=str(tmp_path)), strict=True)
        assert manifest.passed
        assert manifest.failed_checks(gating_only=False)[0]["name"] == "induce.unitarity_refinement"

    def test_error_recorded(self, tmp_path, monkeypatch):
        """Library errors are written to the manifest and re-raised"""
        def broken(config, pool):
            raise OffGrid("boost leaves the grid", {"rows": 3})

        monkeypatch.setitem(experiment_runner.EXPERIMENT_RUNNERS, "induce", broken)
        with pytest.raises(OffGrid):
            run(ExperimentConfig(experiment="induce", out_dir=str(tmp_path)))
        stored = load_manifest(next(tmp_path.glob("run_*")))
        assert stored["status"] == "error"
        assert stored["error"]["error"] == "OffGrid"
        assert stored["error"]["details"] == {"rows": 3}


class TestReplay:

    def setup_method(self):
        """Setup test fixtures"""
        self.config = ExperimentConfig(experiment="little-group", grid=8, kappa=[1.0, 2.0], seed=3)

    def test_identical_replay(self, tmp_path):
        """Replaying a run reproduces its manifest hash"""
        original = run(self.config.updated(out_dir=str(tmp_path)))
        again = replay(original.run_dir)
        assert again.manifest_hash() == original.manifest_hash()
        assert again.replay_of == original.manifest_hash()
        assert all(row["identical"] for row in again.comparison)
        assert again.run_dir != original.run_dir

    def test_altered_seed(self, tmp_path):
        """A different seed is a different configuration"""
        original = run(self.config.updated(out_dir=str(tmp_path)))
        with pytest.raises(Mismatch):
            replay(original.run_dir, overrides={"seed": 4})

    def test_tampered_values(self, tmp_path):
        """Changed check values are detected"""
        original = run(self.config.updated(out_dir=str(tmp_path)))
        stored = load_manifest(original.run_dir)
        stored["checks"][0]["value"] = 0.5
        with pytest.raises(Mismatch) as info:
            replay(stored)
        assert info.value.details["differing"] == [stored["checks"][0]["name"]]

    def test_version_bump_warns(self, tmp_path, caplog):
        """Another artifact version only warns and reports the comparison"""
        original = run(self.config.updated(out_dir=str(tmp_path)))
        stored = load_manifest(original.run_dir)
        stored["version"] = "0.9.0"
        stored["checks"][0]["value"] = 0.5
        with caplog.at_level("WARNING"):
            again = replay(stored)
        assert "0.9.0" in caplog.text
        assert [row["name"] for row in again.comparison if not row["identical"]] == [stored["checks"][0]["name"]]

    def test_manifest_round_trip(self, tmp_path):
        """Stored manifests load back into RunManifest"""
        original = run(self.config.updated(out_dir=str(tmp_path)))
        loaded = RunManifest.from_dict(load_manifest(original.run_dir))
        assert loaded.manifest_hash() == original.manifest_hash()


class TestCommandLine:

    def setup_method(self):
        """Setup test fixtures"""
        from run import main
        self.main = main

    def test_list(self, capsys):
        """--list prints every check"""
        assert self.main(["--list"]) == 0
        output = capsys.readouterr().out
        assert "lattice.kms" in output and "fock.tomita_S" in output

    def test_passing_run(self, tmp_path, capsys):
        """Exit code 0 when every gating check passes"""
        code = self.main(["little-group", "--grid", "8", "--kappa", "1", "--out", str(tmp_path)])
        assert code == 0
        assert "✅" in capsys.readouterr().out
        assert list(tmp_path.glob("run_*/manifest.json"))

    def test_flat_localization_exits_one(self, tmp_path, monkeypatch):
        """A localize run whose scores barely fall exits with 1"""
        scores = {0.0: 0.9842, 1.0: 0.8932, 5.0: 0.8322, 25.0: 0.7457}
        monkeypatch.setattr(experiment_runner, "localization_score",
                            lambda net, region, m=4: LocalizationReport(
                                kappa=net.rep.kappa, grid="16", n_wedges=m, cutoff=net.cutoff,
                                score=scores[net.rep.kappa], min_principal_angle=0.1))
        assert self.main(["localize", "--grid", "16", "--kappa", "0,1,5,25", "--out", str(tmp_path)]) == 1

    def test_config_errors(self, tmp_path):
        """Invalid configurations exit with 2"""
        assert self.main(["localize", "--kappa", "", "--out", str(tmp_path)]) == 2
        assert self.main(["teleport", "--out", str(tmp_path)]) == 2
        assert self.main([]) == 2

    def test_config_file_with_overrides(self, tmp_path):
        """Flags override values from --config"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"experiment": "little-group", "grid": 6, "kappa": [1.0]}), encoding="utf-8")
        assert self.main(["--config", str(path), "--grid", "8", "--out", str(tmp_path / "runs")]) == 0
        stored = load_manifest(next((tmp_path / "runs").glob("run_*")))
        assert stored["config"]["grid"] == 8

    def test_failed_checks_exit_one(self, tmp_path, monkeypatch):
        """Gating failures exit with 1 and keep the manifest"""
        monkeypatch.setitem(experiment_runner.EXPERIMENT_RUNNERS, "little-group",
                            lambda config, pool: ExperimentResult(measurements={}))
        assert self.main(["little-group", "--out", str(tmp_path)]) == 1
        assert list(tmp_path.glob("run_*/manifest.json"))

    def test_replay_mismatch_exit_three(self, tmp_path):
        """A tampered manifest replays with exit code 3"""
        original = run(ExperimentConfig(experiment="little-group", grid=8, kappa=[1.0], out_dir=str(tmp_path)))
        stored = load_manifest(original.run_dir)
        stored["checks"][1]["value"] = 1.0
        path = Path(original.run_dir) / "manifest.json"
        path.write_text(json.dumps(stored), encoding="utf-8")
        assert self.main(["--replay", original.run_dir]) == 3
        assert self.main(["--replay", original.run_dir, "--log-level", "error"]) == 3


if __name__ == "__main__":
    pytest.main([__file__])

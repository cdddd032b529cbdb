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
Test suite for experiment configuration
"""

import json
import pytest
import sys
import os
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.errors import ConfigInvalid
from src.experiment_config import (
    DEFAULT_TOLERANCE, EXPERIMENTS, LOG_LEVEL_ENV, THREADS_ENV, ExperimentConfig, log_level, parse_kappa,
    worker_count,
)


class TestValidation:

    def setup_method(self):
        """Setup test fixtures"""
        self.config = ExperimentConfig(experiment="localize")

    def test_defaults_are_valid(self):
        """Every named experiment validates with default settings"""
        for name in EXPERIMENTS:
            ExperimentConfig(experiment=name).validate()

    def test_full_size_defaults(self):
        """Defaults run the 64 grid and at least 100 seeded families"""
        assert self.config.grid == 64
        assert self.config.families >= 100

    def test_unknown_experiment(self):
        """Names outside the experiment set are rejected"""
        with pytest.raises(ConfigInvalid):
            ExperimentConfig(experiment="teleport").validate()

    def test_empty_kappa(self):
        """An empty kappa list is invalid"""
        with pytest.raises(ConfigInvalid):
            self.config.updated(kappa=[]).validate()

    def test_negative_kappa(self):
        """kappa is a radius"""
        with pytest.raises(ConfigInvalid):
            self.config.updated(kappa=[0.0, -1.0]).validate()

    def test_seed_range(self):
        """Seeds are 64-bit unsigned integers"""
        self.config.updated(seed=2 ** 64 - 1).validate()
        with pytest.raises(ConfigInvalid):
            self.config.updated(seed=2 ** 64).validate()
        with pytest.raises(ConfigInvalid):
            self.config.updated(seed=-1).validate()

    def test_small_grid(self):
        """Grids below 4 are rejected"""
        with pytest.raises(ConfigInvalid):
            self.config.updated(grid=3, wedges=1).validate()

    def test_wedges_must_divide_grid(self):
        """The wedge family must sit on grid angles"""
        with pytest.raises(ConfigInvalid):
            self.config.updated(grid=30, wedges=4).validate()
        self.config.updated(grid=30, wedges=3).validate()

    def test_dimension_and_tolerance(self):
        """dim lies in [1, 6] and tolerances are positive"""
        with pytest.raises(ConfigInvalid):
            self.config.updated(dim=7).validate()
        with pytest.raises(ConfigInvalid):
            self.config.updated(tol=-1e-9).validate()
        with pytest.raises(ConfigInvalid):
            self.config.updated(cutoff=0.0).validate()


class TestLoading:

    def test_unknown_keys_rejected(self):
        """Unknown configuration keys raise ConfigInvalid"""
        with pytest.raises(ConfigInvalid) as info:
            ExperimentConfig.from_dict({"experiment": "huygens", "colour": "blue"})
        assert info.value.details["unknown"] == ["colour"]

    def test_experiment_required(self):
        """A configuration names its experiment"""
        with pytest.raises(ConfigInvalid):
            ExperimentConfig.from_dict({"seed": 3})

    def test_kappa_converted(self):
        """Integer kappa values become floats"""
        config = ExperimentConfig.from_dict({"experiment": "localize", "kappa": [0, 1]})
        assert config.kappa == [0.0, 1.0]
        assert all(isinstance(k, float) for k in config.kappa)
        with pytest.raises(ConfigInvalid):
            ExperimentConfig.from_dict({"experiment": "localize", "kappa": ["x"]})

    def test_json_file(self, tmp_path):
        """Configurations load from JSON files"""
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"experiment": "fock-verify", "dim": 2, "seed": 11}), encoding="utf-8")
        config = ExperimentConfig.from_json(path)
        assert config.experiment == "fock-verify"
        assert config.dim == 2 and config.seed == 11

    def test_bad_json_file(self, tmp_path):
        """Unreadable or non-object files are invalid"""
        path = tmp_path / "config.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigInvalid):
            ExperimentConfig.from_json(path)
        with pytest.raises(ConfigInvalid):
            ExperimentConfig.from_json(tmp_path / "missing.json")

    def test_updated_ignores_none(self):
        """None leaves a field unchanged"""
        config = ExperimentConfig(experiment="localize", seed=5).updated(seed=None, grid=16)
        assert config.seed == 5 and config.grid == 16


class TestHash:

    def test_out_dir_not_hashed(self):
        """The output directory does not change the hash"""
        a = ExperimentConfig(experiment="induce", out_dir="a")
        b = ExperimentConfig(experiment="induce", out_dir="b")
        assert a.config_hash() == b.config_hash()

    def test_seed_changes_hash(self):
        """Any experimental setting changes the hash"""
        a = ExperimentConfig(experiment="induce")
        assert a.config_hash() != a.updated(seed=1).config_hash()
        assert len(a.config_hash()) == 64

    def test_round_trip_keeps_hash(self):
        """Loading a stored config reproduces its hash"""
        config = ExperimentConfig(experiment="localize", kappa=[0.0, 5.0], tol=1e-9)
        assert ExperimentConfig.from_dict(config.to_dict()).config_hash() == config.config_hash()

    def test_tolerance_policy(self):
        """--tol overrides the absolute tolerance"""
        assert ExperimentConfig(experiment="localize").abs_tol == DEFAULT_TOLERANCE
        assert ExperimentConfig(experiment="localize", tol=1e-6).tolerance_policy().abs_tol == 1e-6


class TestEnvironment:

    def test_parse_kappa(self):
        """Comma separated lists parse to floats"""
        assert parse_kappa("0,1, 5,25") == [0.0, 1.0, 5.0, 25.0]
        with pytest.raises(ConfigInvalid):
            parse_kappa("0,one")

    def test_worker_count(self, monkeypatch):
        """MODLOC_THREADS caps the pool and defaults to one"""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert worker_count() == 1
        monkeypatch.setenv(THREADS_ENV, "4")
        assert worker_count() == 4
        monkeypatch.setenv(THREADS_ENV, "zero")
        with pytest.raises(ConfigInvalid):
            worker_count()
        monkeypatch.setenv(THREADS_ENV, "0")
        with pytest.raises(ConfigInvalid):
            worker_count()

    def test_log_level(self, monkeypatch):
        """Flag beats environment beats the WARNING default"""
        monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
        assert log_level() == "WARNING"
        monkeypatch.setenv(LOG_LEVEL_ENV, "info")
        assert log_level() == "INFO"
        assert log_level("debug") == "DEBUG"
        with pytest.raises(ConfigInvalid):
            log_level("loud")


if __name__ == "__main__":
    pytest.main([__file__])

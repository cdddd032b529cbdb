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
Experiment configuration: validation, hashing and environment settings
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.errors import ConfigInvalid
from src.report_writer import canonical_json_bytes
from src.subspace_core import TolerancePolicy

logger = logging.getLogger(__name__)

EXPERIMENTS = ("lattice-verify", "little-group", "induce", "localize", "huygens", "fock-verify", "counterexample")
DEFAULT_TOLERANCE = 1e-8
MAX_SEED = 2 ** 64
MAX_DIM = 6

THREADS_ENV = "MODLOC_THREADS"
LOG_LEVEL_ENV = "MODLOC_LOG_LEVEL"


@dataclass
class ExperimentConfig:
    """One named experiment with its seed, grid and tolerance settings"""
    experiment: str
    seed: int = 0
    grid: int = 64
    kappa: List[float] = field(default_factory=lambda: [0.0, 1.0, 5.0, 25.0])
    wedges: int = 4
    families: int = 100
    dim: int = 4
    tol: Optional[float] = None
    cutoff: float = 20.0
    out_dir: str = "modloc_runs"
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(payload) - known)
        if unknown:
            raise ConfigInvalid(f"unknown configuration keys: {', '.join(unknown)}", {"unknown": unknown})
        if "experiment" not in payload:
            raise ConfigInvalid("configuration needs an experiment name")
        config = cls(**payload)
        try:
            config.kappa = [float(k) for k in config.kappa]
        except (TypeError, ValueError):
            raise ConfigInvalid("kappa must be a list of numbers", {"kappa": payload.get("kappa")})
        return config

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "ExperimentConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigInvalid(f"cannot read configuration file {path}: {e}")
        if not isinstance(payload, dict):
            raise ConfigInvalid("configuration file must hold a JSON object")
        return cls.from_dict(payload)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def updated(self, **changes: Any) -> "ExperimentConfig":
        """Copy with the given fields replaced; None values are ignored"""
        changes = {key: value for key, value in changes.items() if value is not None}
        return replace(self, **changes)

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigInvalid(f"unknown experiment {self.experiment!r}", {"experiments": list(EXPERIMENTS)})
        if not isinstance(self.seed, int) or not 0 <= self.seed < MAX_SEED:
            raise ConfigInvalid("seed must be an integer in [0, 2^64)", {"seed": self.seed})
        if not self.kappa:
            raise ConfigInvalid("kappa list is empty")
        if any(k < 0 for k in self.kappa):
            raise ConfigInvalid("kappa values must be non-negative", {"kappa": self.kappa})
        if self.grid < 4:
            raise ConfigInvalid("grid must be at least 4", {"grid": self.grid})
        if self.wedges < 1 or self.grid % self.wedges:
            raise ConfigInvalid("wedge count must divide the angular grid", {"grid": self.grid, "wedges": self.wedges})
        if self.families < 1:
            raise ConfigInvalid("families must be positive", {"families": self.families})
        if not 1 <= self.dim <= MAX_DIM:
            raise ConfigInvalid(f"dim must lie in [1, {MAX_DIM}]", {"dim": self.dim})
        if self.tol is not None and self.tol <= 0:
            raise ConfigInvalid("tolerance must be positive", {"tol": self.tol})
        if self.cutoff <= 0:
            raise ConfigInvalid("spectral cutoff must be positive", {"cutoff": self.cutoff})
        return self

    @property
    def abs_tol(self) -> float:
        return self.tol if self.tol is not None else DEFAULT_TOLERANCE

    def tolerance_policy(self) -> TolerancePolicy:
        return TolerancePolicy(abs_tol=self.abs_tol)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON without the output directory"""
        payload = self.to_dict()
        payload.pop("out_dir")
        return hashlib.sha256(canonical_json_bytes(payload)).hexdigest()


def parse_kappa(text: str) -> List[float]:
    """'0,1,5,25' -> [0.0, 1.0, 5.0, 25.0]"""
    items = [item.strip() for item in text.split(",") if item.strip()]
    try:
        return [float(item) for item in items]
    except ValueError:
        raise ConfigInvalid(f"cannot parse kappa list {text!r}")


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        count = int(raw)
    except ValueError:
        raise ConfigInvalid(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if count < 1:
        raise ConfigInvalid(f"{THREADS_ENV} must be positive, got {count}")
    return count


def log_level(override: Optional[str] = None) -> str:
    level = (override or os.environ.get(LOG_LEVEL_ENV) or "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise ConfigInvalid(f"unknown log level {level!r}")
    return level

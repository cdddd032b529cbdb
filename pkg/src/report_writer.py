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
Run directory writer

Every run lands in <out>/run_<timestamp>/ with
    manifest.json      run manifest (config, hashes, checks, runtimes)
    checks.csv         one row per executed check
    <experiment>.csv   the experiment table
    plot_*.csv         plot data, ready for any plotting tool
    *.json             experiment documents (identity records, support reports)
"""

import json
import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["name", "experiment", "value", "threshold", "comparator", "passed", "gating", "description"]


def canonical_json_bytes(obj: Any) -> bytes:
    """Sorted keys, compact separators, trailing newline"""
    text = json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"
    return text.encode("utf-8")


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    os.replace(str(tmp), str(path))


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    path = Path(path)
    _atomic_write_text(path, frame.to_csv(index=False))
    return path


def create_run_dir(out_dir: Union[str, Path], timestamp: Optional[str] = None) -> Path:
    """Fresh run_<timestamp> directory; a numeric suffix keeps same-second runs apart"""
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    timestamp = timestamp or datetime.now().strftime("%Y%m%d_%H%M%S")
    run_dir = base / f"run_{timestamp}"
    suffix = 1
    while run_dir.exists():
        run_dir = base / f"run_{timestamp}_{suffix}"
        suffix += 1
    run_dir.mkdir()
    return run_dir


def checks_frame(checks: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(checks, columns=CHECK_COLUMNS)


def write_run(manifest: Dict[str, Any], out_dir: Union[str, Path],
              tables: Optional[Dict[str, pd.DataFrame]] = None,
              documents: Optional[Dict[str, Any]] = None) -> Dict[str, Path]:
    """Write manifest, checks and experiment outputs; returns the written files by role"""
    run_dir = create_run_dir(out_dir)
    files: Dict[str, Path] = {}
    for name, frame in (tables or {}).items():
        files[name] = write_csv(run_dir / f"{name}.csv", frame)
    for name, document in (documents or {}).items():
        files[name] = write_json(run_dir / f"{name}.json", document)
    files["checks"] = write_csv(run_dir / "checks.csv", checks_frame(manifest.get("checks", [])))
    manifest = dict(manifest, run_dir=str(run_dir), files={k: p.name for k, p in files.items()})
    files["manifest"] = write_json(run_dir / "manifest.json", manifest)
    logger.info("run written to %s (%d files)", run_dir, len(files))
    return files


def load_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    """Manifest from a run directory or a manifest.json path"""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    return json.loads(path.read_text(encoding="utf-8"))


def load_checks(run_dir: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(Path(run_dir) / "checks.csv")

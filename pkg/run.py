#!/usr/bin/env python3.10
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
Command line runner for ModLoc experiments

    modloc localize --kappa 0,1,5,25 --grid 64 --wedges 4
    modloc lattice-verify --seed 7 --dim 4 --families 20
    modloc --list
    modloc --replay modloc_runs/run_20260101_120000
"""

import argparse
import logging
import sys

from src import __version__
from src.errors import CheckFailed, ConfigInvalid, Mismatch, ModlocError
from src.experiment_config import EXPERIMENTS, ExperimentConfig, log_level, parse_kappa
from src.experiment_runner import list_checks, replay, run

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_INVALID = 2
EXIT_MISMATCH = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modloc", description="Modular localization numerical laboratory")
    parser.add_argument("experiment", nargs="?", help=f"one of: {', '.join(EXPERIMENTS)}")
    parser.add_argument("--seed", type=int, default=None, help="64-bit random seed")
    parser.add_argument("--grid", type=int, default=None, help="angular grid size N (radial N+1)")
    parser.add_argument("--kappa", type=str, default=None, help="comma separated kappa list, e.g. 0,1,5,25")
    parser.add_argument("--wedges", type=int, default=None, help="wedges around the double cone")
    parser.add_argument("--families", type=int, default=None, help="seeded samples per identity")
    parser.add_argument("--dim", type=int, default=None, help="one-particle dimension n")
    parser.add_argument("--cutoff", type=float, default=None, help="spectral cutoff of the boost generator")
    parser.add_argument("--tol", type=float, default=None, help="absolute tolerance override")
    parser.add_argument("--out", dest="out_dir", default=None, help="output directory for run folders")
    parser.add_argument("--config", default=None, help="JSON configuration file; flags override it")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--list", action="store_true", help="list every check with its experiment and exit")
    parser.add_argument("--replay", default=None, metavar="RUN", help="re-run a stored manifest and compare")
    parser.add_argument("--version", action="version", version=f"modloc {__version__}")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = ExperimentConfig.from_json(args.config)
        if args.experiment:
            config = config.updated(experiment=args.experiment)
    elif args.experiment:
        config = ExperimentConfig(experiment=args.experiment)
    else:
        raise ConfigInvalid("name an experiment or pass --config")
    kappa = parse_kappa(args.kappa) if args.kappa is not None else None
    return config.updated(seed=args.seed, grid=args.grid, kappa=kappa, wedges=args.wedges, families=args.families,
                          dim=args.dim, cutoff=args.cutoff, tol=args.tol, out_dir=args.out_dir).validate()


def print_checks(checks) -> None:
    for check in checks:
        if check["passed"]:
            marker = "✅"
        elif check["gating"]:
            marker = "❌"
        else:
            marker = "⚠️ "
        print(f"{marker} {check['name']}: {check['value']:.3e} {check['comparator']} {check['threshold']:.3e}")


def print_list() -> None:
    table = list_checks()
    for experiment, rows in table.groupby("experiment", sort=False):
        print(f"\n{experiment}")
        for row in rows.itertuples():
            kind = "" if row.gating else " (advisory)"
            print(f"  {row.check}{kind}: {row.property}")


def print_summary(manifest) -> None:
    print("\n" + "="*60)
    print("📋 RUN SUMMARY")
    print("="*60)
    gating = [c for c in manifest.checks if c["gating"]]
    advisory = [c for c in manifest.checks if not c["gating"]]
    print(f"{'✅' if manifest.passed else '❌'} {manifest.experiment}: "
          f"{sum(c['passed'] for c in gating)}/{len(gating)} gating checks passed")
    failed_advisory = [c["name"] for c in advisory if not c["passed"]]
    if failed_advisory:
        print(f"⚠️  advisory checks outside threshold: {', '.join(failed_advisory)}")
    print(f"🔑 config {manifest.config_hash[:16]}  manifest {manifest.manifest_hash()[:16]}")
    if manifest.run_dir:
        print(f"📄 Run directory: {manifest.run_dir}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        logging.basicConfig(level=log_level(args.log_level),
                            format="%(asctime)s %(levelname)s %(name)s: %(message)s")
        if args.list:
            print_list()
            return EXIT_OK

        if args.replay:
            print("="*60)
            print(f"🔁 REPLAYING {args.replay}")
            print("="*60)
            manifest = replay(args.replay, out_dir=args.out_dir)
            differing = [row["name"] for row in manifest.comparison if not row["identical"]]
            if differing:
                print(f"⚠️  version changed; {len(differing)} check(s) differ: {', '.join(differing)}")
            else:
                print("✅ every check value is bit-identical")
            print_summary(manifest)
            return EXIT_OK

        config = config_from_args(args)
        print("="*60)
        print(f"🔬 RUNNING {config.experiment.upper()} (seed {config.seed})")
        print("="*60)
        manifest = run(config)
        print_checks(manifest.checks)
        print_summary(manifest)
        return EXIT_OK if manifest.passed else EXIT_CHECK_FAILED

    except ConfigInvalid as e:
        print(f"❌ Invalid configuration: {e.message}")
        return EXIT_CONFIG_INVALID
    except Mismatch as e:
        print(f"❌ Replay mismatch: {e.message}")
        for name in e.details.get("differing", []):
            print(f"   {name}")
        return EXIT_MISMATCH
    except CheckFailed as e:
        print(f"❌ {e.message}: {', '.join(e.details.get('failed', []))}")
        if e.details.get("run_dir"):
            print(f"📄 Manifest written to {e.details['run_dir']}")
        return EXIT_CHECK_FAILED
    except ModlocError as e:
        print(f"❌ {type(e).__name__}: {e.message}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

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

from pathlib import Path

from setuptools import setup

requirements = [line.strip() for line in Path(__file__).with_name("requirements.txt").read_text().splitlines()
                if line.strip() and not line.startswith("#")]

setup(
    name="modloc",
    version="1.0.0",
    description="Modular localization numerical laboratory",
    author="Jefferson Richards",
    license="AGPL-3.0-or-later",
    packages=["src"],
    py_modules=["run"],
    python_requires=">=3.10",
    install_requires=[r for r in requirements if not r.startswith("pytest")],
    extras_require={"test": ["pytest>=7.0.0"]},
    entry_points={"console_scripts": ["modloc=run:main"]},
)

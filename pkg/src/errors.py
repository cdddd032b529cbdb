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
Error types raised across ModLoc
"""

from typing import Any, Dict, Optional


class ModlocError(Exception):
    """Base class for every error ModLoc raises on purpose"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, "details": self.details}


# subspace-core
class NotStandard(ModlocError):
    pass


class InvalidModularData(ModlocError):
    pass


class AmbientMismatch(ModlocError):
    pass


class NotInvariant(ModlocError):
    pass


# wigner-reps
class OffCone(ModlocError):
    pass


class SectionSingular(ModlocError):
    pass


class OffGrid(ModlocError):
    pass


class IncompatibleStep(ModlocError):
    pass


# modular-net
class NoPCT(ModlocError):
    pass


class CutoffTooAggressive(ModlocError):
    pass


class EmptyFamily(ModlocError):
    pass


class NotEdgeDirection(ModlocError):
    pass


class KNotInvariant(ModlocError):
    pass


# huygens
class SupportViolation(ModlocError):
    pass


# fock
class NotCyclicSeparating(ModlocError):
    pass


class DimensionOverflow(ModlocError):
    pass


# cli-harness
class ConfigInvalid(ModlocError):
    pass


class CheckFailed(ModlocError):
    pass


class Mismatch(ModlocError):
    pass

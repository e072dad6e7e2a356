"""Exception types shared across the package."""
from __future__ import annotations


class SteinerBeadError(Exception):
    """Base class for all library errors."""


class InvalidNormError(SteinerBeadError):
    """Raised when a unit-ball description fails validation."""


class StructuralError(SteinerBeadError):
    """Raised when a tree or topology violates its structural invariants."""


class UsageError(SteinerBeadError):
    """Raised when an operation is called outside its contract."""


class CapacityError(SteinerBeadError):
    """Raised when an input exceeds a documented size cap."""


class SchemaError(SteinerBeadError):
    """Raised when a JSON document fails schema validation."""


class ConstructionError(SteinerBeadError):
    """Raised when a generator cannot realize its advertised guarantees.

    Carries optional diagnostics so a failed construction can be inspected.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BondEncounteredError(ConstructionError):
    """Raised when a displacement runs into a Steiner bond and must abort."""

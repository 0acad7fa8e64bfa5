"""Exception types shared by the validators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Violation:
    """One failed axiom, with enough concrete data to re-derive it by hand."""

    axiom: str
    message: str
    witness: dict[str, Any] = field(default_factory=dict, compare=False)

    def __str__(self):
        return f"[{self.axiom}] {self.message}"


class ValidationError(ValueError):
    pass


class StructureError(ValidationError):
    """Input data is incomplete or ill-typed (missing component, map, name)."""


class AxiomError(ValidationError):
    """Input is well-formed but violates one or more axioms."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            lines += f"; ... ({more} more)"
        super().__init__(lines)


class AlgebraMismatch(ValidationError):
    """Operands belong to different ambient algebras."""


class SizeGuardError(RuntimeError):
    """An enumeration would exceed the configured size cap."""

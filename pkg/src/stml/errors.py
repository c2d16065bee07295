"""Error types shared across the package.

Every error that can cross the CLI or service boundary carries a stable
``code`` string so callers can dispatch on it without parsing messages.
"""

from __future__ import annotations


class StmlError(Exception):
    """Base class for all package errors."""

    code = "Error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class SourceSyntaxError(StmlError):
    """Raised when C-subset source text fails to parse."""

    code = "SyntaxError"

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(message)
        self.line = line
        self.col = col

    def to_json(self) -> dict:
        out = super().to_json()
        out["line"] = self.line
        out["col"] = self.col
        return out


class PragmaError(StmlError):
    code = "PragmaError"


class UnsupportedFeature(StmlError):
    code = "UnsupportedFeature"


class LoweringError(StmlError):
    code = "LoweringError"


class AnchorError(StmlError):
    """A skeleton annotation does not precede a for loop."""

    code = "AnchorError"


class RuleSyntaxError(StmlError):
    code = "RuleSyntaxError"


class UnboundMetavariable(StmlError):
    code = "UnboundMetavariable"


class InstantiationError(StmlError):
    code = "InstantiationError"


class PredicateArityError(StmlError):
    code = "PredicateArityError"


class OutOfBounds(StmlError):
    code = "OutOfBounds"


class UnboundVariable(StmlError):
    code = "UnboundVariable"


class StepBudgetExceeded(StmlError):
    code = "StepBudgetExceeded"


class StaleMatch(StmlError):
    """The program changed after this match was produced."""

    code = "StaleMatch"


class UnsafeApplication(StmlError):
    """Refused to apply a match whose conditions are not all proven."""

    code = "UnsafeApplication"


class EmptyHistory(StmlError):
    code = "EmptyHistory"


class NoViableCandidate(StmlError):
    """An oracle could not choose among the offered candidates."""

    code = "NoViableCandidate"


class BudgetExceeded(StmlError):
    """The transformation driver hit its step budget before is_final."""

    code = "BudgetExceeded"


class FileError(StmlError):
    code = "FileError"

"""
Exception hierarchy for hitlab.

Every failure a service can report is a HitlabError subclass carrying a stable
``error_code`` and a ``details`` mapping, so the CLI can render it and map it to an
exit code without string matching.
"""

from typing import Any, Dict, List, Optional


class HitlabError(Exception):
    """Base error with a machine-readable code"""

    error_code: str = "hitlab_error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, error_code: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}
        if error_code:
            self.error_code = error_code

    def to_dict(self) -> Dict[str, Any]:
        return {"error_code": self.error_code, "message": self.message, "details": self.details}


class ConfigurationError(HitlabError):
    """Raised when settings or an experiment config fail validation"""

    error_code = "configuration_error"

    def __init__(self, message: str, missing_vars: List[str] = None, invalid_vars: Dict[str, str] = None):
        super().__init__(message, {"missing_vars": missing_vars or [], "invalid_vars": invalid_vars or {}})
        self.missing_vars = missing_vars or []
        self.invalid_vars = invalid_vars or {}


class InvalidSystemError(HitlabError):
    """A system, point or cell violates a construction-time invariant"""

    error_code = "invalid_system"


class PrefixExhausted(HitlabError):
    error_code = "prefix_exhausted"


class SideMismatch(HitlabError):
    error_code = "side_mismatch"


class Undecidable(HitlabError):
    error_code = "undecidable"


class InadmissibleCell(HitlabError):
    error_code = "inadmissible_cell"


class BadDelta(HitlabError):
    error_code = "bad_delta"


class EmptySetError(HitlabError):
    error_code = "empty_set"


class NoRuns(HitlabError):
    error_code = "no_runs"


class BudgetExceeded(HitlabError):
    error_code = "budget_exceeded"


class SampleTooSmall(HitlabError):
    error_code = "sample_too_small"


class NotASubshift(HitlabError):
    error_code = "not_a_subshift"


class WindowOverflow(HitlabError):
    error_code = "window_overflow"


class PrefixLimit(HitlabError):
    error_code = "prefix_limit"


class UnknownFixture(HitlabError):
    error_code = "unknown_fixture"


class MissingSeries(HitlabError):
    error_code = "missing_series"


class DenominatorOverflow(HitlabError):
    error_code = "denominator_overflow"


class DepthLimitExceeded(HitlabError):
    error_code = "depth_limit_exceeded"


__all__ = [
    "HitlabError",
    "ConfigurationError",
    "InvalidSystemError",
    "PrefixExhausted",
    "SideMismatch",
    "Undecidable",
    "InadmissibleCell",
    "BadDelta",
    "EmptySetError",
    "NoRuns",
    "BudgetExceeded",
    "SampleTooSmall",
    "NotASubshift",
    "WindowOverflow",
    "PrefixLimit",
    "UnknownFixture",
    "MissingSeries",
    "DenominatorOverflow",
    "DepthLimitExceeded",
]

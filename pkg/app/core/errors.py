"""
Audit error hierarchy
"""
from typing import Any, Dict


class AuditError(Exception):
    """Base error of the audit toolkit"""

    code: str = "AuditError"
    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error report"""
        return {
            "error": self.code,
            "message": self.message,
            "context": {key: str(value) for key, value in self.context.items()},
        }


# Lexicon
class MissingCategory(AuditError):
    code = "MissingCategory"


class DuplicateOccupation(AuditError):
    code = "DuplicateOccupation"


class MalformedRow(AuditError):
    code = "MalformedRow"

    def __init__(self, path: Any, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}", path=path, line=line)
        self.line = line


class RegistryInvalid(AuditError):
    code = "RegistryInvalid"


# Survey
class OutOfRange(AuditError):
    code = "OutOfRange"


class EmptyTally(AuditError):
    code = "EmptyTally"


# Sentences
class PlaceholderMismatch(AuditError):
    code = "PlaceholderMismatch"


# Translation
class BackendUnavailable(AuditError):
    code = "BackendUnavailable"


class AuthFailure(AuditError):
    code = "AuthFailure"


class AlignmentError(AuditError):
    code = "AlignmentError"


class CacheCorrupt(AuditError):
    code = "CacheCorrupt"


class MissingFixture(AuditError):
    code = "MissingFixture"


class MalformedFixture(AuditError):
    code = "MalformedFixture"


# Scoring
class UnscorableLabel(AuditError):
    code = "UnscorableLabel"


class InvalidOrder(AuditError):
    code = "InvalidOrder"


class MissingReference(AuditError):
    code = "MissingReference"


# Aggregation
class EmptyGroup(AuditError):
    code = "EmptyGroup"


class InsufficientData(AuditError):
    code = "InsufficientData"


class MissingWeight(AuditError):
    code = "MissingWeight"


# Pipeline
class ConfigError(AuditError):
    code = "ConfigError"
    exit_code = 2


class MissingArtifact(AuditError):
    code = "MissingArtifact"
    exit_code = 2


class InternalError(AuditError):
    code = "InternalError"

from enum import Enum
from typing import NoReturn


class ErrorType(str, Enum):
    UNREADABLE_FILE = "UNREADABLE_FILE"
    FILE_TOO_LARGE = "FILE_TOO_LARGE"
    SYNTAX_ERROR = "SYNTAX_ERROR"
    SCHEMA_ERROR = "SCHEMA_ERROR"
    INVALID_STRUCTURE = "INVALID_STRUCTURE"
    UNKNOWN_AGENT = "UNKNOWN_AGENT"
    INVALID_HISTORY = "INVALID_HISTORY"
    UNREALISABLE_OBSERVATIONS = "UNREALISABLE_OBSERVATIONS"
    NOT_RECURRING = "NOT_RECURRING"
    NODE_LIMIT_EXCEEDED = "NODE_LIMIT_EXCEEDED"
    INCOHERENT_COLOURS = "INCOHERENT_COLOURS"
    OBSERVABILITY_VIOLATION = "OBSERVABILITY_VIOLATION"
    UNKNOWN_COLOUR = "UNKNOWN_COLOUR"
    INVALID_OBJECTIVE = "INVALID_OBJECTIVE"
    MISSING_OBJECTIVE = "MISSING_OBJECTIVE"
    ALPHABET_MISMATCH = "ALPHABET_MISMATCH"
    COALITION_LOSES = "COALITION_LOSES"
    KIND_MISMATCH = "KIND_MISMATCH"
    INVALID_STRATEGY = "INVALID_STRATEGY"
    INTERNAL_INVARIANT = "INTERNAL_INVARIANT"


# Exit code reserved for usage and input faults
EXIT_ERROR = 2


class EpitrackError(Exception):
    """Fault raised by the toolkit; carries a report-ready payload."""

    def __init__(self, err: ErrorType, detail: object | None = None):
        self.type = err
        self.detail = detail
        self.payload = {
            "status": "error",
            "code": EXIT_ERROR,
            "error": {
                "type": err.value,
                "detail": detail,
            },
        }
        super().__init__(f"{err.value}: {detail}")


def raise_error(err: ErrorType, detail: object | None = None) -> NoReturn:
    raise EpitrackError(err, detail)

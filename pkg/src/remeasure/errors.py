"""Exception hierarchy shared across the engine.

Every error carries a stable ``code`` string so the HTTP layer can emit
structured ``{code, message}`` bodies without inspecting types.
"""


class EngineError(Exception):
    """Base class for all engine errors."""

    code = "engine-error"


class SchemaError(EngineError):
    code = "invalid-schema"


class IngestError(EngineError):
    """CSV ingestion failure; ``row_errors`` lists (row, attribute, value)."""

    code = "ingest-error"

    def __init__(self, message, row_errors=None):
        super().__init__(message)
        self.row_errors = list(row_errors or [])


class UnknownAttributeError(EngineError):
    code = "unknown-attribute"


class DomainMismatchError(EngineError):
    code = "domain-mismatch"


class InvalidStrategyError(EngineError):
    code = "invalid-strategy"


class RankDeficientError(EngineError):
    code = "rank-deficient"


class BudgetExhaustedError(EngineError):
    code = "budget-exhausted"


class UnknownQueryError(EngineError):
    code = "unknown-query"


class UnknownSessionError(EngineError):
    code = "unknown-session"


class UnknownDatasetError(EngineError):
    code = "unknown-dataset"


class ConfigError(EngineError):
    code = "invalid-config"


class KindMismatchError(EngineError):
    code = "kind-mismatch"

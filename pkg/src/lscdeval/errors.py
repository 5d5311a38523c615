"""Exception hierarchy shared across the toolkit.

The command line maps these onto exit codes (see ``cli``): config problems
exit with 2, data-format problems with 3, undefined metrics with 4.
"""


class LscdEvalError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(LscdEvalError):
    """Invalid run configuration or incompatible task/measure selection."""


class DataFormatError(LscdEvalError):
    """Malformed input file: bad columns, out-of-range values, duplicates."""


class IngestionError(DataFormatError):
    """References in a dataset do not resolve (e.g. dangling usage ids)."""


class CorruptStoreError(DataFormatError):
    """Embedding store failed validation.

    ``offset`` is the byte position at which validation failed, when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset


class StructuralError(LscdEvalError):
    """Contract violation between in-memory objects (mixed lemmas,
    unassigned nodes, mismatched id domains)."""


class DegenerateInputError(LscdEvalError):
    """An operation received input on which its result is undefined
    (empty period, zero vector, no valid judgments)."""


class UndefinedMetricError(LscdEvalError):
    """A metric is undefined on the given series (constant values,
    insufficient overlap)."""

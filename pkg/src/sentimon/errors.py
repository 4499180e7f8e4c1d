"""Exception hierarchy shared by every module.

The CLI maps any :class:`SentimonError` to exit status 2.
"""


class SentimonError(Exception):
    """Base class for all runtime errors raised by this package."""


# corpus
class IoFailure(SentimonError):
    pass


class MalformedRow(SentimonError):
    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class UnknownLabel(SentimonError):
    def __init__(self, value: str, row: int | None = None):
        where = f" (row {row})" if row is not None else ""
        super().__init__(f"unknown sentiment label {value!r}{where}")
        self.value = value
        self.row = row


class InvalidRatio(SentimonError):
    pass


# models
class EmptyTrainingSet(SentimonError):
    pass


class NonFinite(SentimonError):
    pass


class DimensionMismatch(SentimonError):
    pass


class TooFewSamples(SentimonError):
    pass


# persistence
class ArtifactError(SentimonError):
    pass


class VersionMismatch(ArtifactError):
    pass


class CorruptArtifact(ArtifactError):
    pass


class SchemaError(ArtifactError):
    pass


# eval
class LengthMismatch(SentimonError):
    pass


class EmptyMatrix(SentimonError):
    pass


# service
class InvalidRange(SentimonError):
    pass

"""
Exception hierarchy for the captioning library and CLI.
Every error carries structured context and the process exit code the CLI maps it to.
"""
from typing import Any, Optional


class CaptioningError(Exception):
    """Base class for all captioning errors"""

    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        self.message = message
        self.context = context
        super().__init__(message)


class ConfigError(CaptioningError):
    """Invalid run configuration or command-line arguments"""

    exit_code = 2


class DataError(CaptioningError):
    """Unreadable, malformed or unusable input data"""

    exit_code = 3


class NumericalError(CaptioningError):
    """Shape violations, non-finite values and failed numerical checks"""

    exit_code = 4


# Embedding text format

class EmbeddingFormatError(DataError):
    """Malformed embedding file; always names the offending line"""

    def __init__(self, message: str, line: int, **context: Any):
        self.line = line
        super().__init__(f"line {line}: {message}", line=line, **context)


class MalformedHeaderError(EmbeddingFormatError):
    pass


class InvalidDimensionError(EmbeddingFormatError):
    pass


class FieldCountError(EmbeddingFormatError):
    pass


class MalformedValueError(EmbeddingFormatError):
    pass


class NonFiniteValueError(EmbeddingFormatError):
    pass


class DuplicateTokenError(EmbeddingFormatError):
    pass


class RowCountError(EmbeddingFormatError):
    pass


class EncodingError(EmbeddingFormatError):
    pass


class MatrixFormatError(DataError):
    """Malformed audio feature or spectrogram sidecar file"""


# Manifests and supervision

class ManifestError(DataError):
    """Manifest schema violation; `field` holds the dotted field path"""

    def __init__(self, message: str, field: Optional[str] = None, **context: Any):
        self.field = field
        super().__init__(message, field=field, **context)


class DanglingReferenceError(DataError):
    def __init__(self, message: str, path: str, **context: Any):
        self.path = path
        super().__init__(message, path=path, **context)


class UnusableSupervisionError(DataError):
    """A description with no in-vocabulary token cannot supervise the decoder"""


class MissingModalityError(DataError):
    pass


class UnknownPlaylistError(DataError):
    def __init__(self, playlist_id: str):
        self.playlist_id = playlist_id
        super().__init__(f"Unknown playlist id: {playlist_id}", playlist_id=playlist_id)


class VocabularyMismatchError(DataError):
    pass


class CheckpointFormatError(DataError):
    """Corrupt, truncated or incompatible checkpoint file"""


# Numerics

class ShapeError(NumericalError, ValueError):
    pass


class NonFiniteGradientError(NumericalError):
    pass


class StaleCacheError(NumericalError):
    """Backward called with a cache that does not belong to these parameters"""


class IllPosedTargetError(NumericalError, ValueError):
    """All-zero target vector; cosine proximity is undefined"""


class GradientCheckError(NumericalError):
    pass

"""
Text formats for numeric payloads.

Embedding files:  line 1 "<V> <D>", then V lines "<token> f1 ... fD".
Matrix files:     line 1 "<rows> <cols>", then one line of cols values per row
                  (spectrograms are F x T, audio feature vectors are 1 x D_a).

Fields are separated by exactly one space, lines end with a newline, no BOM.
Values are written with 17 significant digits so a parse/serialize cycle is exact.
"""
import codecs
import logging
import math
import re
from typing import BinaryIO, List, Tuple, Union

import numpy as np

from ..errors import (
    DuplicateTokenError,
    EncodingError,
    FieldCountError,
    InvalidDimensionError,
    MalformedHeaderError,
    MalformedValueError,
    MatrixFormatError,
    NonFiniteValueError,
    RowCountError,
)

logger = logging.getLogger(__name__)

_INT_RE = re.compile(r"[+-]?\d+")
_REAL_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

Source = Union[bytes, bytearray, BinaryIO]


class _LexicalError(Exception):
    def __init__(self, message: str, non_finite: bool = False):
        self.non_finite = non_finite
        super().__init__(message)


def format_real(value: float) -> str:
    return format(float(value), ".17g")


def parse_real(field: str) -> float:
    """Parse one decimal real; raises _LexicalError for malformed or non-finite input"""
    if _REAL_RE.fullmatch(field):
        value = float(field)
        if not math.isfinite(value):
            raise _LexicalError(f"value '{field}' overflows to a non-finite number", non_finite=True)
        return value
    try:
        value = float(field)
    except ValueError:
        raise _LexicalError(f"malformed number '{field}'")
    if not math.isfinite(value):
        raise _LexicalError(f"non-finite value '{field}'", non_finite=True)
    raise _LexicalError(f"malformed number '{field}'")


def _read_bytes(source: Source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    return source.read()


def _decode_lines(data: bytes) -> List[str]:
    if data.startswith(codecs.BOM_UTF8):
        raise MalformedHeaderError("byte order mark is not allowed", line=1)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise EncodingError(f"invalid UTF-8: {e.reason}", line=data[:e.start].count(b"\n") + 1)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return lines


def _parse_header(line: str) -> Tuple[int, int]:
    fields = line.split(" ")
    if len(fields) != 2 or not all(_INT_RE.fullmatch(f) for f in fields):
        raise MalformedHeaderError(f"expected '<V> <D>', found '{line[:40]}'", line=1)
    vocab_size, dim = int(fields[0]), int(fields[1])
    if vocab_size <= 0 or dim <= 0:
        raise InvalidDimensionError(f"V and D must be positive, found V={vocab_size} D={dim}", line=1)
    return vocab_size, dim


def parse_embedding_rows(source: Source) -> Tuple[List[str], np.ndarray]:
    """
    Parse the embedding text format.

    Args:
        source: raw bytes or a binary stream

    Returns:
        (words in file order, V x D float64 matrix)

    Raises:
        EmbeddingFormatError subclasses naming the offending line
    """
    lines = _decode_lines(_read_bytes(source))
    if not lines:
        raise MalformedHeaderError("empty file", line=1)
    vocab_size, dim = _parse_header(lines[0])

    words: List[str] = []
    seen = {}
    matrix = np.empty((vocab_size, dim), dtype=np.float64)

    for row, line in enumerate(lines[1:vocab_size + 1]):
        line_no = row + 2
        fields = line.split(" ")
        if len(fields) != dim + 1:
            raise FieldCountError(f"expected {dim + 1} fields, found {len(fields)}", line=line_no)
        token = fields[0]
        if not token or any(ch.isspace() for ch in token):
            raise MalformedValueError(f"invalid token '{token}'", line=line_no)
        if token in seen:
            raise DuplicateTokenError(f"duplicate token '{token}' (first on line {seen[token]})",
                                      line=line_no, token=token)
        seen[token] = line_no
        for col, field in enumerate(fields[1:]):
            try:
                matrix[row, col] = parse_real(field)
            except _LexicalError as e:
                cls = NonFiniteValueError if e.non_finite else MalformedValueError
                raise cls(str(e), line=line_no, token=token)
        words.append(token)

    found = len(lines) - 1
    if found < vocab_size:
        raise RowCountError(f"header declares {vocab_size} rows, file has {found}", line=len(lines) + 1)
    if found > vocab_size:
        raise RowCountError(f"unexpected row beyond the declared {vocab_size}", line=vocab_size + 2)

    logger.debug(f"Parsed embedding text: V={vocab_size} D={dim}")
    return words, matrix


def serialize_embedding_rows(words: List[str], matrix: np.ndarray) -> bytes:
    """Write words and matrix in the embedding text format"""
    out = [f"{len(words)} {matrix.shape[1]}\n"]
    for word, row in zip(words, matrix):
        out.append(word + "".join(" " + format_real(x) for x in row) + "\n")
    return "".join(out).encode("utf-8")


def parse_matrix_text(source: Source, name: str = "<matrix>") -> np.ndarray:
    """
    Parse the matrix text format used for spectrograms and audio feature vectors.

    Raises:
        MatrixFormatError naming the file and line
    """
    data = _read_bytes(source)
    try:
        lines = _decode_lines(data)
        if not lines:
            raise MalformedHeaderError("empty file", line=1)
        rows, cols = _parse_header(lines[0])
    except (MalformedHeaderError, InvalidDimensionError, EncodingError) as e:
        raise MatrixFormatError(f"{name}: {e.message}", path=name) from e

    if len(lines) - 1 != rows:
        raise MatrixFormatError(f"{name}: header declares {rows} rows, file has {len(lines) - 1}", path=name)

    matrix = np.empty((rows, cols), dtype=np.float64)
    for r, line in enumerate(lines[1:]):
        fields = line.split(" ")
        if len(fields) != cols:
            raise MatrixFormatError(f"{name}: line {r + 2}: expected {cols} values, found {len(fields)}", path=name)
        for c, field in enumerate(fields):
            try:
                matrix[r, c] = parse_real(field)
            except _LexicalError as e:
                raise MatrixFormatError(f"{name}: line {r + 2}: {e}", path=name)
    return matrix


def serialize_matrix_text(matrix: np.ndarray) -> bytes:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    out = [f"{matrix.shape[0]} {matrix.shape[1]}\n"]
    for row in matrix:
        out.append(" ".join(format_real(x) for x in row) + "\n")
    return "".join(out).encode("utf-8")

"""
Word embedding table: lookup, bag-of-words mean embeddings and nearest-word decoding.
The table is immutable after construction and safe to share between threads.
"""
import hashlib
import logging
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics.pairwise import cosine_similarity

from ..errors import DataError, NumericalError, ShapeError
from .text_format import Source, parse_embedding_rows, serialize_embedding_rows

logger = logging.getLogger(__name__)

EOS_TOKEN = "<eos>"
EOS_SEED = 0xE05


class BagEmbedding(NamedTuple):
    """Mean embedding of the in-vocabulary tokens of a bag"""
    vector: np.ndarray
    known_count: int
    no_known_words: bool


class NearestWord(NamedTuple):
    """Result of a cosine nearest-neighbour decode"""
    token: str
    row: int
    similarity: float
    degenerate: bool


class EmbeddingTable:
    """Vocabulary of V unique tokens mapped to rows of a V x D_w float64 matrix"""

    def __init__(self, words: Sequence[str], matrix: np.ndarray):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(words) or matrix.shape[1] < 1:
            raise ShapeError(f"matrix shape {matrix.shape} does not match {len(words)} words")
        if not np.all(np.isfinite(matrix)):
            raise NumericalError("embedding matrix contains non-finite entries")

        index: Dict[str, int] = {}
        for row, word in enumerate(words):
            if word in index:
                raise DataError(f"duplicate token '{word}'", token=word)
            index[word] = row

        matrix.setflags(write=False)
        self._words: Tuple[str, ...] = tuple(words)
        self._matrix = matrix
        self._index = index

    @property
    def words(self) -> Tuple[str, ...]:
        return self._words

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def vocab_size(self) -> int:
        return len(self._words)

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index_of(self, token: str) -> Optional[int]:
        return self._index.get(token)

    def with_eos(self) -> "EmbeddingTable":
        """Return a table with the reserved end-of-sequence row appended (idempotent)"""
        if EOS_TOKEN in self._index:
            return self
        return EmbeddingTable(self._words + (EOS_TOKEN,), np.vstack([self._matrix, eos_vector(self.dim)]))

    @property
    def eos_row(self) -> Optional[int]:
        return self._index.get(EOS_TOKEN)


def eos_vector(dim: int) -> np.ndarray:
    """Deterministic unit-norm embedding of the end-of-sequence token"""
    rng = np.random.default_rng(EOS_SEED)
    vector = rng.standard_normal(dim)
    return vector / np.linalg.norm(vector)


def parse_embedding_text(source: Source) -> EmbeddingTable:
    """Parse the embedding text format into a table, preserving file row order"""
    words, matrix = parse_embedding_rows(source)
    return EmbeddingTable(words, matrix)


def serialize_embedding_text(table: EmbeddingTable) -> bytes:
    return serialize_embedding_rows(list(table.words), table.matrix)


def load_embeddings(path: Union[str, Path], add_eos: bool = True) -> EmbeddingTable:
    """Load an embedding file from disk and register the end-of-sequence token"""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            table = parse_embedding_text(f)
    except FileNotFoundError as e:
        raise DataError(f"Embeddings file not found: {path}", path=str(path)) from e
    except DataError as e:
        e.context.setdefault("path", str(path))
        raise
    logger.info(f"Loaded {table.vocab_size} embeddings of dimension {table.dim} from {path}")
    return table.with_eos() if add_eos else table


def lookup(table: EmbeddingTable, token: str) -> Optional[np.ndarray]:
    """Return the stored row for token, or None when it is out of vocabulary"""
    row = table.index_of(token)
    return None if row is None else table.matrix[row]


def bag_embedding(table: EmbeddingTable, tokens: Iterable[str]) -> BagEmbedding:
    """
    Mean embedding of the in-vocabulary tokens (duplicates counted with multiplicity).
    Out-of-vocabulary tokens are skipped; with none known the zero vector is returned and flagged.
    """
    rows = [row for row in (table.index_of(t) for t in tokens) if row is not None]
    if not rows:
        return BagEmbedding(np.zeros(table.dim), 0, True)
    return BagEmbedding(table.matrix[rows].mean(axis=0), len(rows), False)


def _similarities(table: EmbeddingTable, query: np.ndarray) -> np.ndarray:
    if len(table) == 0:
        raise DataError("nearest-word lookup on an empty table")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (table.dim,):
        raise ShapeError(f"query has shape {query.shape}, expected ({table.dim},)")
    if not np.all(np.isfinite(query)):
        raise NumericalError("nearest-word query contains non-finite values")
    return cosine_similarity(query[np.newaxis, :], table.matrix)[0]


def nearest_word(table: EmbeddingTable, query: np.ndarray) -> NearestWord:
    """
    Token maximizing cosine similarity with query.

    Ties resolve to the lowest row index. A zero query is degenerate: row 0 is
    returned with the degenerate flag set.
    """
    similarities = _similarities(table, query)
    if not np.any(query):
        logger.warning("Zero vector passed to nearest_word; returning row 0")
        return NearestWord(table.words[0], 0, 0.0, True)
    row = int(np.argmax(similarities))
    return NearestWord(table.words[row], row, float(similarities[row]), False)


def most_similar(table: EmbeddingTable, query: np.ndarray, k: int = 5) -> List[Tuple[str, float]]:
    """Top-k (token, cosine) pairs in decreasing similarity, ties by row index"""
    similarities = _similarities(table, query)
    order = np.argsort(-similarities, kind="stable")[:k]
    return [(table.words[i], float(similarities[i])) for i in order]


def vocab_hash(table: EmbeddingTable) -> str:
    """SHA-256 over the words and the little-endian float64 matrix"""
    digest = hashlib.sha256()
    for word in table.words:
        digest.update(word.encode("utf-8") + b"\n")
    digest.update(np.ascontiguousarray(table.matrix, dtype="<f8").tobytes())
    return digest.hexdigest()

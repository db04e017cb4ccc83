"""
Word embedding module.
Parses embedding files and maps between words and vectors.
"""
from .table import (
    EOS_TOKEN,
    EOS_SEED,
    BagEmbedding,
    NearestWord,
    EmbeddingTable,
    eos_vector,
    parse_embedding_text,
    serialize_embedding_text,
    load_embeddings,
    lookup,
    bag_embedding,
    nearest_word,
    most_similar,
    vocab_hash
)
from .text_format import (
    parse_matrix_text,
    serialize_matrix_text
)

__all__ = [
    'EOS_TOKEN',
    'EOS_SEED',
    'BagEmbedding',
    'NearestWord',
    'EmbeddingTable',
    'eos_vector',
    'parse_embedding_text',
    'serialize_embedding_text',
    'load_embeddings',
    'lookup',
    'bag_embedding',
    'nearest_word',
    'most_similar',
    'vocab_hash',
    'parse_matrix_text',
    'serialize_matrix_text'
]

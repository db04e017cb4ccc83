import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from music_captioning.embeddings import (
    EOS_TOKEN,
    EmbeddingTable,
    bag_embedding,
    eos_vector,
    load_embeddings,
    lookup,
    most_similar,
    nearest_word,
    parse_embedding_text,
    parse_matrix_text,
    serialize_embedding_text,
    serialize_matrix_text,
    vocab_hash,
)
from music_captioning.errors import (
    DataError,
    DuplicateTokenError,
    EmbeddingFormatError,
    EncodingError,
    FieldCountError,
    InvalidDimensionError,
    MalformedHeaderError,
    MalformedValueError,
    MatrixFormatError,
    NonFiniteValueError,
    NumericalError,
    RowCountError,
)


def test_parse_minimal_file():
    table = parse_embedding_text(b"2 3\ncat 1 0 0\ndog 0 1 0\n")
    assert table.vocab_size == 2
    assert table.dim == 3
    assert table.words == ("cat", "dog")
    np.testing.assert_array_equal(lookup(table, "cat"), [1.0, 0.0, 0.0])


def test_parse_single_row_from_stream():
    table = parse_embedding_text(io.BytesIO(b"1 1\na 5.0\n"))
    np.testing.assert_array_equal(table.matrix, [[5.0]])


def test_parse_accepts_missing_final_newline():
    table = parse_embedding_text(b"1 2\na 1.5 -2e3")
    np.testing.assert_array_equal(table.matrix, [[1.5, -2000.0]])


@pytest.mark.parametrize("data, error, line", [
    (b"", MalformedHeaderError, 1),
    (b"\xef\xbb\xbf1 1\na 1\n", MalformedHeaderError, 1),
    (b"2\ncat 1\ndog 2\n", MalformedHeaderError, 1),
    (b"0 3\n", InvalidDimensionError, 1),
    (b"2 3\ncat 1 0\ndog 0 1 0\n", FieldCountError, 2),
    (b"1 2\ncat 1  2\n", FieldCountError, 2),
    (b"1 2\ncat 1 x\n", MalformedValueError, 2),
    (b"2 1\ncat 1\ndog nan\n", NonFiniteValueError, 3),
    (b"1 1\ncat 1e999\n", NonFiniteValueError, 2),
    (b"2 1\ncat 1\ncat 2\n", DuplicateTokenError, 3),
    (b"3 1\ncat 1\ndog 2\n", RowCountError, 4),
    (b"1 1\ncat 1\ndog 2\n", RowCountError, 3),
    (b"1 1\n\xff 1\n", EncodingError, 2),
])
def test_corrupt_embedding_files(data, error, line):
    with pytest.raises(error) as excinfo:
        parse_embedding_text(data)
    assert excinfo.value.line == line
    assert f"line {line}" in str(excinfo.value)
    assert isinstance(excinfo.value, EmbeddingFormatError)


def test_serialize_parse_identity():
    rng = np.random.default_rng(11)
    table = EmbeddingTable(["a", "b", "c_d"], rng.standard_normal((3, 5)) * 1e3)
    again = parse_embedding_text(serialize_embedding_text(table))
    assert again.words == table.words
    np.testing.assert_array_equal(again.matrix, table.matrix)


def test_lookup_absent(cat_dog_table):
    assert lookup(cat_dog_table, "bird") is None


def test_lookup_round_trips_every_row():
    rng = np.random.default_rng(5)
    words = [f"w{i}" for i in range(20)]
    matrix = rng.standard_normal((20, 4))
    table = parse_embedding_text(serialize_embedding_text(EmbeddingTable(words, matrix)))
    for row, word in enumerate(words):
        np.testing.assert_array_equal(lookup(table, word), matrix[row])


@pytest.mark.parametrize("tokens, expected", [
    (["cat", "cat"], [1.0, 0.0, 0.0]),
    (["cat", "dog"], [0.5, 0.5, 0.0]),
    (["cat", "bird", "dog"], [0.5, 0.5, 0.0]),
])
def test_bag_embedding_mean(cat_dog_table, tokens, expected):
    bag = bag_embedding(cat_dog_table, tokens)
    np.testing.assert_allclose(bag.vector, expected)
    assert not bag.no_known_words


def test_bag_embedding_all_oov(cat_dog_table):
    bag = bag_embedding(cat_dog_table, ["bird"])
    np.testing.assert_array_equal(bag.vector, np.zeros(3))
    assert bag.no_known_words
    assert bag.known_count == 0


@given(st.lists(st.sampled_from(["cat", "dog", "bird"]), min_size=1, max_size=8), st.randoms())
def test_bag_embedding_permutation_and_duplication_invariant(tokens, random):
    table = EmbeddingTable(["cat", "dog"], np.array([[1.0, 0.0, 2.0], [0.0, 3.0, -1.0]]))
    base = bag_embedding(table, tokens).vector
    shuffled = list(tokens)
    random.shuffle(shuffled)
    np.testing.assert_allclose(bag_embedding(table, shuffled).vector, base, atol=1e-12)
    np.testing.assert_allclose(bag_embedding(table, tokens + tokens).vector, base, atol=1e-12)


def test_nearest_word_cosine_argmax():
    table = EmbeddingTable(["a", "b"], np.array([[1.0, 0.0], [0.0, 1.0]]))
    result = nearest_word(table, np.array([0.9, 0.1]))
    assert result.token == "a"
    assert result.row == 0
    assert not result.degenerate


def test_nearest_word_tie_goes_to_lowest_row():
    table = EmbeddingTable(["a", "b", "c"], np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
    assert nearest_word(table, np.array([3.0, 0.0])).token == "a"


def test_nearest_word_zero_query_is_degenerate(cat_dog_table):
    result = nearest_word(cat_dog_table, np.zeros(3))
    assert result.token == "cat"
    assert result.degenerate


def test_nearest_word_rejects_non_finite_query(cat_dog_table):
    with pytest.raises(NumericalError):
        nearest_word(cat_dog_table, np.array([np.nan, 0.0, 0.0]))


def test_nearest_word_round_trip_on_random_table():
    rng = np.random.default_rng(0)
    words = [f"w{i}" for i in range(200)]
    table = EmbeddingTable(words, rng.standard_normal((200, 16)))
    for word in words:
        assert nearest_word(table, lookup(table, word)).token == word


def test_nearest_word_matches_brute_force_scan():
    rng = np.random.default_rng(1)
    table = EmbeddingTable([f"w{i}" for i in range(50)], rng.standard_normal((50, 8)))
    for _ in range(100):
        query = rng.standard_normal(8)
        scores = [row @ query / (np.linalg.norm(row) * np.linalg.norm(query)) for row in table.matrix]
        assert nearest_word(table, query).row == int(np.argmax(scores))


@settings(max_examples=50)
@given(st.floats(min_value=1e-3, max_value=1e3), st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_nearest_word_scale_invariant(alpha, seed):
    rng = np.random.default_rng(seed)
    table = EmbeddingTable([f"w{i}" for i in range(10)], rng.standard_normal((10, 5)))
    query = rng.standard_normal(5)
    assert nearest_word(table, alpha * query).token == nearest_word(table, query).token


def test_most_similar_orders_by_similarity():
    table = EmbeddingTable(["a", "b", "c"], np.array([[1.0, 0.0], [1.0, 1.0], [-1.0, 0.0]]))
    ranked = most_similar(table, np.array([1.0, 0.0]), k=2)
    assert [word for word, _ in ranked] == ["a", "b"]
    assert ranked[0][1] == pytest.approx(1.0)


def test_with_eos_is_idempotent_and_unit_norm(cat_dog_table):
    table = cat_dog_table.with_eos()
    assert table.words[-1] == EOS_TOKEN
    assert table.with_eos() is table
    assert np.linalg.norm(lookup(table, EOS_TOKEN)) == pytest.approx(1.0)
    np.testing.assert_array_equal(eos_vector(3), lookup(table, EOS_TOKEN))


def test_table_rejects_duplicates_and_is_read_only():
    with pytest.raises(DataError):
        EmbeddingTable(["a", "a"], np.eye(2))
    table = EmbeddingTable(["a", "b"], np.eye(2))
    with pytest.raises(ValueError):
        table.matrix[0, 0] = 5.0


def test_load_embeddings_adds_eos(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_bytes(b"2 3\ncat 1 0 0\ndog 0 1 0\n")
    table = load_embeddings(path)
    assert table.words == ("cat", "dog", EOS_TOKEN)
    assert load_embeddings(path, add_eos=False).vocab_size == 2


def test_load_embeddings_missing_file_names_path(tmp_path):
    with pytest.raises(DataError) as excinfo:
        load_embeddings(tmp_path / "missing.txt")
    assert "missing.txt" in str(excinfo.value)


def test_vocab_hash_tracks_words_and_values(cat_dog_table):
    same = EmbeddingTable(["cat", "dog"], cat_dog_table.matrix.copy())
    renamed = EmbeddingTable(["cat", "cow"], cat_dog_table.matrix.copy())
    shifted = EmbeddingTable(["cat", "dog"], cat_dog_table.matrix + 1e-9)
    assert vocab_hash(same) == vocab_hash(cat_dog_table)
    assert vocab_hash(renamed) != vocab_hash(cat_dog_table)
    assert vocab_hash(shifted) != vocab_hash(cat_dog_table)


def test_matrix_text_round_trip():
    rng = np.random.default_rng(2)
    matrix = rng.standard_normal((4, 6))
    np.testing.assert_array_equal(parse_matrix_text(serialize_matrix_text(matrix)), matrix)


@pytest.mark.parametrize("data", [
    b"",
    b"2 2\n1 2\n",
    b"1 2\n1\n",
    b"1 2\n1 inf\n",
])
def test_corrupt_matrix_files(data):
    with pytest.raises(MatrixFormatError):
        parse_matrix_text(data, name="spectrogram.txt")

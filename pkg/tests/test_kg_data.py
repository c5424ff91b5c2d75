import numpy as np
import pytest

from src.core.exceptions import AugmentationStateError, DataError, TripleParseError, VocabularyError
from src.domain import Split
from src.services.kg_data import (
    TripleStore,
    Vocab,
    add_reciprocals,
    build_filter_index,
    decode_triples,
    dump_vocab,
    file_checksum,
    load_dataset,
    load_triples,
    load_vocab,
    tail_frequency_weights,
)

def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path

def test_load_three_lines(tmp_path):
    path = write(tmp_path / "train.txt", "a\tr1\tb\nb\tr1\tc\na\tr2\tc\n")
    store, vocab = load_triples(path)
    assert len(store) == 3
    assert vocab.n_entities == 3
    assert vocab.n_relations_original == 2
    assert store.triples.tolist() == [[0, 0, 1], [1, 0, 2], [0, 1, 2]]

def test_empty_file_leaves_vocab_unchanged(tmp_path):
    vocab = Vocab(entity_names=["a"], relation_names=["r"])
    store, vocab = load_triples(write(tmp_path / "valid.txt", ""), vocab, Split.VALID)
    assert len(store) == 0
    assert store.triples.shape == (0, 3)
    assert vocab.entity_names == ["a"]

def test_wrong_field_count_names_line(tmp_path):
    path = write(tmp_path / "train.txt", "a\tr\tb\na\tr\n")
    with pytest.raises(TripleParseError) as excinfo:
        load_triples(path)
    assert excinfo.value.line_number == 2
    assert ":2:" in str(excinfo.value)

def test_invalid_utf8_names_line(tmp_path):
    path = tmp_path / "train.txt"
    path.write_bytes(b"a\tr\tb\na\tr\t\xff\xfe\n")
    with pytest.raises(TripleParseError, match="invalid UTF-8") as excinfo:
        load_triples(path)
    assert excinfo.value.line_number == 2

def test_unseen_entity_in_valid_is_named(tmp_path):
    _, vocab = load_triples(write(tmp_path / "train.txt", "a\tr\tb\n"))
    with pytest.raises(VocabularyError, match="'zebra'"):
        load_triples(write(tmp_path / "valid.txt", "a\tr\tzebra\n"), vocab, Split.VALID)

def test_missing_file_is_data_error(tmp_path):
    with pytest.raises(DataError):
        load_triples(tmp_path / "nope.txt")

def test_duplicates_are_dropped(tmp_path):
    store, _ = load_triples(write(tmp_path / "train.txt", "a\tr\tb\na\tr\tb\n"))
    assert len(store) == 1

def test_reciprocals():
    vocab = Vocab(entity_names=["a", "b"], relation_names=["r"])
    augmented = add_reciprocals(TripleStore(np.array([[0, 0, 1]]), Split.TRAIN), vocab)
    assert augmented.triples.tolist() == [[0, 0, 1], [1, 1, 0]]
    assert vocab.n_relations_total == 2
    assert vocab.relation_name(1) == "r_reverse"
    assert decode_triples(augmented, vocab) == [("a", "r", "b"), ("b", "r_reverse", "a")]

def test_reciprocal_name_clash_is_rejected():
    vocab = Vocab(entity_names=["a", "b"], relation_names=["r", "r_reverse"])
    with pytest.raises(DataError, match="r_reverse"):
        add_reciprocals(TripleStore(np.array([[0, 0, 1], [1, 1, 0]]), Split.TRAIN), vocab)
    assert not vocab.augmented

def test_reciprocals_of_empty_store():
    vocab = Vocab(relation_names=["r"])
    assert len(add_reciprocals(TripleStore(np.zeros((0, 3)), Split.TEST), vocab)) == 0

def test_double_augmentation_is_rejected():
    vocab = Vocab(entity_names=["a", "b"], relation_names=["r"])
    augmented = add_reciprocals(TripleStore(np.array([[0, 0, 1]]), Split.TRAIN), vocab)
    with pytest.raises(AugmentationStateError):
        add_reciprocals(augmented, vocab)

def test_filter_index():
    index = build_filter_index([TripleStore(np.array([[0, 0, 1]]), Split.TRAIN),
                                TripleStore(np.array([[0, 0, 2]]), Split.TEST)])
    assert index[(0, 0)] == frozenset({1, 2})
    assert index[(5, 5)] == frozenset()
    assert (0, 0, 2) in index
    assert (0, 1, 2) not in index

def test_tail_weights():
    train = TripleStore(np.array([[0, 0, 1], [2, 0, 1], [0, 0, 2]]), Split.TRAIN)
    assert np.all(tail_frequency_weights(train, 0.0, 3).w == 1.0)
    weights = tail_frequency_weights(train, 0.1, 3).w
    assert weights[1] == pytest.approx(1.0)
    assert weights[2] == pytest.approx(0.95)
    assert weights[0] == pytest.approx(0.9)

def test_tail_weights_need_train():
    with pytest.raises(DataError):
        tail_frequency_weights(TripleStore(np.zeros((0, 3)), Split.TRAIN), 0.1, 3)

def test_load_dataset_filters_all_splits(tmp_path):
    train = write(tmp_path / "train.txt", "a\tr\tb\nb\tr\tc\n")
    valid = write(tmp_path / "valid.txt", "a\tr\tc\n")
    test = write(tmp_path / "test.txt", "c\tr\ta\n")
    data = load_dataset(train, valid, test)
    assert data.vocab.augmented
    assert len(data.train) == 4
    assert data.filter[(0, 0)] == frozenset({1, 2})
    # reciprocal query of the test fact: (a, r_reverse, ?) -> c
    assert 2 in data.filter[(0, 1)]

def test_vocab_round_trip(tmp_path):
    vocab = Vocab(entity_names=["a", "b c"], relation_names=["r"], augmented=True)
    dump_vocab(vocab, tmp_path)
    loaded = load_vocab(tmp_path)
    assert loaded.entity_names == ["a", "b c"]
    assert loaded.relation_names == ["r"]
    assert loaded.n_relations_total == 2

def test_checksum_tracks_content(tmp_path):
    first = file_checksum(write(tmp_path / "x.txt", "a\tr\tb\n"))
    assert first == file_checksum(tmp_path / "x.txt")
    assert first != file_checksum(write(tmp_path / "x.txt", "a\tr\tc\n"))

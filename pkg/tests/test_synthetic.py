import numpy as np

from src.domain import Split
from src.services.kg_data import load_dataset
from src.services.synthetic import synthetic_low_rank_kg, write_splits

def test_sizes_and_reciprocals():
    data = synthetic_low_rank_kg(n_entities=40, n_relations=3, rank=2, n_triples=300, seed=1)
    n_original = (len(data.train) + len(data.valid) + len(data.test)) // 2
    assert n_original == 300
    assert data.vocab.n_relations_total == 6
    assert len(data.valid) // 2 <= 30

def test_same_seed_same_graph():
    first = synthetic_low_rank_kg(n_entities=30, n_relations=2, n_triples=100, seed=4)
    second = synthetic_low_rank_kg(n_entities=30, n_relations=2, n_triples=100, seed=4)
    assert np.array_equal(first.train.triples, second.train.triples)
    assert np.array_equal(first.test.triples, second.test.triples)

def test_written_splits_load_back_identically(tmp_path):
    data = synthetic_low_rank_kg(n_entities=30, n_relations=3, rank=2, n_triples=200, seed=2)
    paths = write_splits(data, tmp_path)
    loaded = load_dataset(paths[Split.TRAIN], paths[Split.VALID], paths[Split.TEST])
    assert loaded.vocab.entity_names == data.vocab.entity_names
    assert loaded.vocab.relation_names == data.vocab.relation_names
    for split in ("train", "valid", "test"):
        assert np.array_equal(getattr(loaded, split).triples, getattr(data, split).triples)

"""Shared fixtures: tiny parameter sets, a toy dataset on disk and its run config"""

from pathlib import Path

import numpy as np
import pytest

from src.core.config import format_run_config
from src.domain import ModelKind
from src.models.tensor_factorization import ModelParams, TABLE_NAMES
from src.services.synthetic import synthetic_low_rank_kg, write_splits

def random_params(kind: ModelKind, n_entities: int, n_relations: int, dim: int, seed: int = 0,
                  scale: float = 0.5) -> ModelParams:
    rng = np.random.default_rng(seed)
    tables = {}
    for name in TABLE_NAMES[kind]:
        if name == "relation":
            shape = (n_relations, dim, dim) if kind is ModelKind.RESCAL else (n_relations, dim)
        else:
            shape = (n_entities, dim)
        tables[name] = scale * rng.standard_normal(shape)
    return ModelParams(kind, dim, tables)

@pytest.fixture
def make_params():
    return random_params

@pytest.fixture(scope="session")
def toy_dataset():
    return synthetic_low_rank_kg(n_entities=30, n_relations=3, rank=2, n_triples=240, seed=3)

@pytest.fixture
def toy_config(tmp_path: Path, toy_dataset) -> Path:
    """Flat run config over the toy splits, with data paths relative to the config file"""

    write_splits(toy_dataset, tmp_path / "data")
    config = tmp_path / "toy.conf"
    config.write_text(format_run_config({
        "model.kind": "CP",
        "model.dim": 8,
        "model.init_scale": 0.1,
        "train.batch_size": 50,
        "train.max_epochs": 4,
        "train.lr": 0.1,
        "train.valid_every": 2,
        "train.seed": 7,
        "reg.kind": "DURA",
        "reg.lambda": 0.01,
        "paths.train": "data/train.txt",
        "paths.valid": "data/valid.txt",
        "paths.test": "data/test.txt",
    }))
    return config

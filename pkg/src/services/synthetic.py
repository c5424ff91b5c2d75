"""
Synthetic Knowledge Graphs
Low-rank ground-truth tensors for desk-scale experiments and the demo config
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from ..domain import Split
from .kg_data import KGDataset, TripleStore, Vocab, prepare_dataset

logger = logging.getLogger(__name__)

def synthetic_low_rank_kg(
    n_entities: int = 200,
    n_relations: int = 6,
    rank: int = 4,
    n_triples: int = 3000,
    seed: int = 0,
    split: Tuple[float, float, float] = (0.8, 0.1, 0.1),
    w0: float = 0.0,
) -> KGDataset:
    """
    Draw a rank-`rank` CP tensor (unit-norm entity factors, Gaussian relation factors)
    and keep its n_triples largest cells as true facts, split at random.
    """

    if n_triples > n_entities * n_relations * n_entities:
        raise ValueError("more triples requested than tensor cells")
    rng = np.random.default_rng(seed)
    heads = rng.standard_normal((n_entities, rank))
    tails = rng.standard_normal((n_entities, rank))
    heads /= np.linalg.norm(heads, axis=1, keepdims=True)
    tails /= np.linalg.norm(tails, axis=1, keepdims=True)
    relations = rng.standard_normal((n_relations, rank))

    tensor = np.einsum("ia,ja,ka->ijk", heads, relations, tails)
    cells = np.sort(np.argpartition(tensor.ravel(), -n_triples)[-n_triples:])
    triples = np.stack(np.unravel_index(cells, tensor.shape), axis=1).astype(np.int64)
    triples = triples[rng.permutation(len(triples))]

    n_train = int(round(split[0] * n_triples))
    n_valid = int(round(split[1] * n_triples))
    train, held_out = triples[:n_train], triples[n_train:]

    # Held-out facts must only use names the train split introduces
    seen_entities = np.zeros(n_entities, dtype=bool)
    seen_entities[train[:, [0, 2]].ravel()] = True
    seen_relations = np.zeros(n_relations, dtype=bool)
    seen_relations[train[:, 1]] = True
    known = seen_entities[held_out[:, 0]] & seen_entities[held_out[:, 2]] & seen_relations[held_out[:, 1]]
    if not known.all():
        logger.debug(f"Moving {int((~known).sum())} held-out facts with unseen names into train")
    train = np.concatenate([train, held_out[~known]])
    held_out = held_out[known]
    n_valid = min(n_valid, len(held_out))

    # Index names in order of first appearance, as load_triples does for the written files
    vocab = Vocab()
    encoded = np.array([
        (vocab.entity_id(f"e{h}", True), vocab.relation_id(f"r{r}", True), vocab.entity_id(f"e{t}", True))
        for h, r, t in train.tolist()
    ], dtype=np.int64)

    def encode(block: np.ndarray) -> np.ndarray:
        return np.array([
            (vocab.entity_index[f"e{h}"], vocab.relation_index[f"r{r}"], vocab.entity_index[f"e{t}"])
            for h, r, t in block.tolist()
        ], dtype=np.int64)

    logger.info(f"🧪 Synthetic rank-{rank} graph: {n_triples} facts over {vocab.n_entities} entities")
    return prepare_dataset(
        vocab,
        TripleStore(encoded, Split.TRAIN),
        TripleStore(encode(held_out[:n_valid]), Split.VALID),
        TripleStore(encode(held_out[n_valid:]), Split.TEST),
        w0,
    )

def write_splits(dataset: KGDataset, directory: Path) -> Dict[Split, Path]:
    """Write the original (non-reciprocal) triples of each split as name TSV files"""

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    vocab = dataset.vocab
    paths = {}
    for split, store in ((Split.TRAIN, dataset.train), (Split.VALID, dataset.valid), (Split.TEST, dataset.test)):
        original = store.triples[store.relations < vocab.n_relations_original]
        frame = pd.DataFrame({
            "head": [vocab.entity_names[i] for i in original[:, 0]],
            "relation": [vocab.relation_names[j] for j in original[:, 1]],
            "tail": [vocab.entity_names[k] for k in original[:, 2]],
        })
        paths[split] = directory / f"{split.value}.txt"
        frame.to_csv(paths[split], sep="\t", header=False, index=False, quoting=csv.QUOTE_NONE)
    return paths

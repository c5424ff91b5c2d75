"""
Knowledge Graph Data Service
Triple file ingestion, vocabularies, reciprocal augmentation, filter index and tail-frequency weights
"""

import csv
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.exceptions import AugmentationStateError, DataError, TripleParseError, VocabularyError
from ..domain import Split

logger = logging.getLogger(__name__)

RECIPROCAL_SUFFIX = "_reverse"

@dataclass
class Vocab:
    """Bidirectional entity/relation name <-> index maps"""

    entity_names: List[str] = field(default_factory=list)
    relation_names: List[str] = field(default_factory=list)
    augmented: bool = False
    entity_index: Dict[str, int] = field(init=False, repr=False)
    relation_index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.entity_index = {name: i for i, name in enumerate(self.entity_names)}
        self.relation_index = {name: i for i, name in enumerate(self.relation_names)}
        if len(self.entity_index) != len(self.entity_names):
            raise DataError("entity names are not unique")
        if len(self.relation_index) != len(self.relation_names):
            raise DataError("relation names are not unique")

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations_original(self) -> int:
        return len(self.relation_names)

    @property
    def n_relations_total(self) -> int:
        return 2 * self.n_relations_original if self.augmented else self.n_relations_original

    def entity_id(self, name: str, extend: bool = False) -> int:
        index = self.entity_index.get(name)
        if index is None:
            if not extend:
                raise VocabularyError(name, "entity")
            index = len(self.entity_names)
            self.entity_names.append(name)
            self.entity_index[name] = index
        return index

    def relation_id(self, name: str, extend: bool = False) -> int:
        index = self.relation_index.get(name)
        if index is None:
            if not extend:
                raise VocabularyError(name, "relation")
            if self.augmented:
                raise AugmentationStateError(
                    f"cannot add relation '{name}' after reciprocal augmentation"
                )
            index = len(self.relation_names)
            self.relation_names.append(name)
            self.relation_index[name] = index
        return index

    def relation_name(self, index: int) -> str:
        n = self.n_relations_original
        if index >= n:
            return self.relation_names[index - n] + RECIPROCAL_SUFFIX
        return self.relation_names[index]

@dataclass(frozen=True)
class TripleStore:
    """Integer-encoded (head, relation, tail) triples of one split"""

    triples: np.ndarray
    split: Split

    def __post_init__(self):
        triples = np.asarray(self.triples, dtype=np.int64).reshape(-1, 3)
        triples.setflags(write=False)
        object.__setattr__(self, "triples", triples)

    def __len__(self) -> int:
        return len(self.triples)

    @property
    def heads(self) -> np.ndarray:
        return self.triples[:, 0]

    @property
    def relations(self) -> np.ndarray:
        return self.triples[:, 1]

    @property
    def tails(self) -> np.ndarray:
        return self.triples[:, 2]

@dataclass(frozen=True)
class FilterIndex:
    """Known-true tails per (head, relation) across all splits"""

    known: Dict[Tuple[int, int], FrozenSet[int]]

    def __getitem__(self, query: Tuple[int, int]) -> FrozenSet[int]:
        return self.known.get(query, frozenset())

    def __contains__(self, triple: Tuple[int, int, int]) -> bool:
        h, r, t = triple
        return t in self.known.get((h, r), ())

    def __len__(self) -> int:
        return len(self.known)

@dataclass(frozen=True)
class WeightTable:
    """Per-entity loss weights derived from tail frequencies"""

    w: np.ndarray
    w0: float

@dataclass(frozen=True)
class KGDataset:
    """Everything training and evaluation need about one knowledge graph"""

    vocab: Vocab
    train: TripleStore
    valid: TripleStore
    test: TripleStore
    filter: FilterIndex
    weights: WeightTable

def load_triples(
    path: Path,
    vocab: Optional[Vocab] = None,
    split: Split = Split.TRAIN,
) -> Tuple[TripleStore, Vocab]:
    """
    Read a head<TAB>relation<TAB>tail file.
    Only the train split may introduce new names; valid/test names must already be known.
    """

    path = Path(path)
    if not path.is_file():
        raise DataError(f"triple file not found: {path}")
    vocab = vocab if vocab is not None else Vocab()
    extend = split is Split.TRAIN

    encoded: Dict[Tuple[int, int, int], None] = {}
    duplicates = 0
    with open(path, "rb") as f:
        for line_number, raw in enumerate(f, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError:
                raise TripleParseError(path, line_number, "invalid UTF-8") from None
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise TripleParseError(
                    path, line_number, f"expected 3 tab-separated fields, got {len(fields)}"
                )
            head, relation, tail = fields
            triple = (
                vocab.entity_id(head, extend),
                vocab.relation_id(relation, extend),
                vocab.entity_id(tail, extend),
            )
            if triple in encoded:
                duplicates += 1
                continue
            encoded[triple] = None

    if duplicates:
        logger.warning(f"⚠️ {path.name}: dropped {duplicates} duplicate triples")
    store = TripleStore(np.array(list(encoded), dtype=np.int64), split)
    logger.info(f"Loaded {len(store)} {split.value} triples from {path}")
    return store, vocab

def add_reciprocals(store: TripleStore, vocab: Vocab) -> TripleStore:
    """Append (t, r + |R|, h) for every (h, r, t)"""

    n = vocab.n_relations_original
    if len(store) and store.relations.max() >= n:
        raise AugmentationStateError(
            f"{store.split.value} split already holds reciprocal relation indices"
        )
    # Reciprocal names must stay distinct from every original name
    clashes = sorted(set(vocab.relation_names) & {name + RECIPROCAL_SUFFIX for name in vocab.relation_names})
    if clashes:
        raise DataError(
            f"relation '{clashes[0]}' collides with the reciprocal of "
            f"'{clashes[0][:-len(RECIPROCAL_SUFFIX)]}'"
        )
    reciprocal = np.stack([store.tails, store.relations + n, store.heads], axis=1)
    vocab.augmented = True
    return TripleStore(np.concatenate([store.triples, reciprocal]), store.split)

def build_filter_index(stores: Iterable[TripleStore]) -> FilterIndex:
    known: Dict[Tuple[int, int], set] = {}
    for store in stores:
        for h, r, t in store.triples.tolist():
            known.setdefault((h, r), set()).add(t)
    return FilterIndex({query: frozenset(tails) for query, tails in known.items()})

def tail_frequency_weights(train: TripleStore, w0: float, n_entities: int) -> WeightTable:
    """w(t) = w0 * #t / max #t + (1 - w0), counted on the (augmented) train split"""

    if not 0.0 <= w0 <= 1.0:
        raise DataError(f"w0 must lie in [0, 1], got {w0}")
    if len(train) == 0:
        raise DataError("cannot weight tails of an empty train split")
    counts = np.bincount(train.tails, minlength=n_entities).astype(np.float64)
    w = w0 * counts / counts.max() + (1.0 - w0)
    w.setflags(write=False)
    return WeightTable(w=w, w0=w0)

def load_dataset(train_path: Path, valid_path: Path, test_path: Path, w0: float = 0.0) -> KGDataset:
    """Load the three splits with one vocabulary and prepare them for training"""

    train, vocab = load_triples(train_path, None, Split.TRAIN)
    valid, _ = load_triples(valid_path, vocab, Split.VALID)
    test, _ = load_triples(test_path, vocab, Split.TEST)
    return prepare_dataset(vocab, train, valid, test, w0)

def prepare_dataset(vocab: Vocab, train: TripleStore, valid: TripleStore, test: TripleStore,
                    w0: float = 0.0) -> KGDataset:
    """Reciprocal augmentation, filter index and weights over already encoded splits"""

    train, valid, test = (add_reciprocals(s, vocab) for s in (train, valid, test))
    dataset = KGDataset(
        vocab=vocab,
        train=train,
        valid=valid,
        test=test,
        filter=build_filter_index([train, valid, test]),
        weights=tail_frequency_weights(train, w0, vocab.n_entities),
    )
    logger.info(
        f"📚 Dataset ready: {vocab.n_entities} entities, {vocab.n_relations_original} relations, "
        f"{len(train)}/{len(valid)}/{len(test)} augmented train/valid/test triples"
    )
    return dataset

def decode_triples(store: TripleStore, vocab: Vocab) -> List[Tuple[str, str, str]]:
    return [
        (vocab.entity_names[h], vocab.relation_name(r), vocab.entity_names[t])
        for h, r, t in store.triples.tolist()
    ]

def dump_vocab(vocab: Vocab, directory: Path) -> None:
    """Write entities.tsv and relations.tsv as (index, name) rows"""

    directory = Path(directory)
    for filename, names in (("entities.tsv", vocab.entity_names), ("relations.tsv", vocab.relation_names)):
        pd.DataFrame({"index": range(len(names)), "name": names}).to_csv(
            directory / filename, sep="\t", header=False, index=False, quoting=csv.QUOTE_NONE
        )

def load_vocab(directory: Path, augmented: bool = True) -> Vocab:
    directory = Path(directory)
    names = []
    for filename in ("entities.tsv", "relations.tsv"):
        path = directory / filename
        if not path.is_file():
            raise DataError(f"vocabulary file not found: {path}")
        if path.stat().st_size == 0:
            names.append([])
            continue
        frame = pd.read_csv(
            path, sep="\t", header=None, names=["index", "name"], dtype={"name": str},
            keep_default_na=False, quoting=csv.QUOTE_NONE,
        )
        if list(frame["index"]) != list(range(len(frame))):
            raise DataError(f"{path}: indices are not 0..n-1 in order")
        names.append(list(frame["name"]))
    return Vocab(entity_names=names[0], relation_names=names[1], augmented=augmented)

def file_checksum(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()

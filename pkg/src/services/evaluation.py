"""
Evaluation Service
Filtered entity ranking with MRR and Hits@N
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional

import numpy as np
from pydantic import BaseModel, model_validator
from rich.table import Table

from ..core.exceptions import ContractError, DataError, NumericError
from ..models.tensor_factorization import ModelParams, score_all_tails, score_batch
from .kg_data import FilterIndex, TripleStore

logger = logging.getLogger(__name__)

HITS_AT = (1, 3, 10)

# Fixed so that scores, and therefore ranks, never depend on the worker count
EVAL_CHUNK_SIZE = 256

class RankingReport(BaseModel):
    """Aggregated filtered ranking metrics"""

    mrr: float
    hits: Dict[int, float]
    n_queries: int

    @model_validator(mode="after")
    def _consistent(self) -> "RankingReport":
        levels = [self.hits[n] for n in sorted(self.hits)]
        if any(a > b for a, b in zip(levels, levels[1:])):
            raise ValueError(f"hits must be monotone in N, got {self.hits}")
        if not 0.0 < self.mrr <= 1.0:
            raise ValueError(f"mrr must lie in (0, 1], got {self.mrr}")
        if self.hits and self.mrr < self.hits[min(self.hits)] - 1e-12:
            raise ValueError("mrr cannot be below hits@1")
        return self

    @classmethod
    def from_ranks(cls, ranks: np.ndarray) -> "RankingReport":
        ranks = np.asarray(ranks, dtype=np.float64)
        if ranks.size == 0:
            raise DataError("cannot report on zero queries")
        return cls(
            mrr=float(np.mean(1.0 / ranks)),
            hits={n: float(np.mean(ranks <= n)) for n in HITS_AT},
            n_queries=int(ranks.size),
        )

    def record(self) -> Dict[str, float]:
        """Flat record: mrr, hits1, hits3, hits10, n_queries"""
        return {
            "mrr": self.mrr,
            **{f"hits{n}": self.hits[n] for n in sorted(self.hits)},
            "n_queries": self.n_queries,
        }

def _rank_against(scores: np.ndarray, true_t: int, known) -> int:
    target = scores[true_t]
    candidates = scores.copy()
    candidates[list(known)] = -np.inf
    # Ties with the true tail do not count against it
    return 1 + int(np.sum(candidates > target))

def filtered_rank(params: ModelParams, h: int, r: int, true_t: int, filter: FilterIndex) -> int:
    known = filter[(h, r)]
    if true_t not in known:
        raise ContractError(f"({h}, {r}, {true_t}) is not in the filter index")
    scores = score_all_tails(params, h, r)
    if not np.all(np.isfinite(scores)):
        raise NumericError(f"non-finite scores for query ({h}, {r}, ?)")
    return _rank_against(scores, true_t, known)

def _rank_chunk(params: ModelParams, triples: np.ndarray, filter: FilterIndex) -> np.ndarray:
    scores = score_batch(params, triples[:, 0], triples[:, 1])
    if not np.all(np.isfinite(scores)):
        raise NumericError("non-finite scores during evaluation")
    targets = scores[np.arange(len(triples)), triples[:, 2]]
    for i, (h, r, t) in enumerate(triples.tolist()):
        known = filter[(h, r)]
        if t not in known:
            raise ContractError(f"({h}, {r}, {t}) is not in the filter index")
        scores[i, list(known)] = -np.inf
    return 1 + np.sum(scores > targets[:, None], axis=1)

def compute_ranks(
    params: ModelParams,
    store: TripleStore,
    filter: FilterIndex,
    workers: int = 1,
    chunk_size: int = EVAL_CHUNK_SIZE,
) -> np.ndarray:
    """Filtered rank of every triple's tail; chunks are reduced in order"""

    triples = store.triples
    chunks = [triples[start:start + chunk_size] for start in range(0, len(triples), chunk_size)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda chunk: _rank_chunk(params, chunk, filter), chunks))
    else:
        parts = [_rank_chunk(params, chunk, filter) for chunk in chunks]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

def evaluate(params: ModelParams, test: TripleStore, filter: FilterIndex, workers: int = 1) -> RankingReport:
    if len(test) == 0:
        raise DataError(f"{test.split.value} split is empty")
    report = RankingReport.from_ranks(compute_ranks(params, test, filter, workers))
    logger.info(
        f"🎯 {test.split.value}: MRR {report.mrr:.4f}, "
        + ", ".join(f"H@{n} {v:.4f}" for n, v in report.hits.items())
    )
    return report

def report_table(report: RankingReport, title: Optional[str] = None) -> Table:
    table = Table(title=title)
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    table.add_row("MRR", f"{report.mrr:.4f}")
    for n, value in report.hits.items():
        table.add_row(f"Hits@{n}", f"{value:.4f}")
    table.add_row("Queries", str(report.n_queries))
    return table

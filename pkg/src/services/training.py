"""
Training Service
Weighted cross-entropy over reciprocal triples, Adagrad, and validation-driven model selection
"""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.special import logsumexp, softmax

from ..core.config import ModelConfig, RegularizerSpec, TrainConfig
from ..core.exceptions import ContractError, NonFiniteScoreError, NumericError
from ..models.gradients import GradientBuffer
from ..models.tensor_factorization import (
    ModelParams,
    accumulate_score_gradients_batch,
    init_params,
    score_batch,
)
from .evaluation import evaluate
from .kg_data import KGDataset, TripleStore, WeightTable
from .regularizers import penalty_batch, penalty_gradients_batch

logger = logging.getLogger(__name__)

@dataclass
class AdagradState:
    """Accumulated squared gradients, one array per parameter table"""

    sum_sq: Dict[str, np.ndarray]

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "AdagradState":
        return cls({name: np.zeros_like(table) for name, table in params.tables.items()})

class HistoryRecord(BaseModel):
    epoch: int
    objective: float
    valid_mrr: float

def cross_entropy_batch(scores: np.ndarray, targets: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-row weight * (logsumexp(s) - s_target) and its gradient weight * (softmax(s) - onehot).
    Rows of scores are queries, columns candidate tails.
    """

    finite = np.isfinite(scores).all(axis=1)
    if not finite.all():
        raise NonFiniteScoreError(int(np.argmin(finite)))
    rows = np.arange(len(scores))
    weights = np.asarray(weights, dtype=np.float64)
    losses = weights * (logsumexp(scores, axis=1) - scores[rows, targets])
    dscores = softmax(scores, axis=1)
    dscores[rows, targets] -= 1.0
    return losses, weights[:, None] * dscores

def cross_entropy_loss(scores: np.ndarray, target: int, weight: float) -> Tuple[float, np.ndarray]:
    losses, dscores = cross_entropy_batch(np.asarray(scores, dtype=np.float64)[None, :], np.array([target]), np.array([weight]))
    return float(losses[0]), dscores[0]

def adagrad_step(params: ModelParams, grads: GradientBuffer, state: AdagradState, lr: float, eps: float) -> None:
    """Sparse Adagrad: only coordinates with a nonzero gradient in this step move"""

    for name, table in params.tables.items():
        rows = grads.touched_rows(name)
        if rows.size == 0:
            continue
        g = grads[name][rows]
        accumulated = state.sum_sq[name][rows] + g * g
        state.sum_sq[name][rows] = accumulated
        table[rows] -= np.where(g != 0.0, lr * g / (np.sqrt(accumulated) + eps), 0.0)

def _chunk_objective(
    params: ModelParams,
    triples: np.ndarray,
    weights: WeightTable,
    reg: RegularizerSpec,
    grads: Optional[GradientBuffer],
    scale: float,
) -> float:
    heads, relations, tails = triples[:, 0], triples[:, 1], triples[:, 2]
    scores = score_batch(params, heads, relations)
    try:
        losses, dscores = cross_entropy_batch(scores, tails, weights.w[tails])
    except NonFiniteScoreError as e:
        raise NumericError(f"non-finite scores at triple {tuple(triples[e.row].tolist())}") from e
    total = float(np.sum(losses)) + penalty_batch(reg, params, heads, relations, tails)
    if not np.isfinite(total):
        bad = int(np.argmax(~np.isfinite(losses))) if not np.isfinite(losses).all() else 0
        raise NumericError(f"non-finite objective at triple {tuple(triples[bad].tolist())}")
    if grads is not None:
        accumulate_score_gradients_batch(params, heads, relations, scale * dscores, grads)
        penalty_gradients_batch(reg, params, heads, relations, tails, grads, scale=scale)
    return total

def batch_objective(
    params: ModelParams,
    batch: np.ndarray,
    weights: WeightTable,
    reg: RegularizerSpec,
    grads: Optional[GradientBuffer] = None,
    executor: Optional[Executor] = None,
    workers: int = 1,
) -> float:
    """
    Mean over the batch of weighted cross-entropy plus penalty.
    When grads is given, its gradient is accumulated there; with several workers each
    contiguous slice of the batch gets its own buffer and the slices merge in index order.
    """

    batch = np.asarray(batch, dtype=np.int64).reshape(-1, 3)
    scale = 1.0 / len(batch)
    if executor is None or workers <= 1 or len(batch) < 2:
        return scale * _chunk_objective(params, batch, weights, reg, grads, scale)

    slices = np.array_split(batch, min(workers, len(batch)))
    buffers = [GradientBuffer(params) if grads is not None else None for _ in slices]
    totals = list(executor.map(
        lambda item: _chunk_objective(params, item[0], weights, reg, item[1], scale),
        zip(slices, buffers),
    ))
    if grads is not None:
        for buffer in buffers:
            grads.merge(buffer)
    return scale * sum(totals)

def train_epoch(
    params: ModelParams,
    train: TripleStore,
    weights: WeightTable,
    cfg: TrainConfig,
    state: AdagradState,
    epoch: int = 1,
    workers: int = 1,
) -> float:
    """One shuffled pass with one Adagrad step per batch; returns the mean per-triple objective"""

    n = len(train)
    if n == 0:
        raise ContractError("cannot train on an empty split")
    order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
    grads = GradientBuffer(params)
    total = 0.0

    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for batch_number, start in enumerate(range(0, n, cfg.batch_size)):
            batch = train.triples[order[start:start + cfg.batch_size]]
            grads.clear()
            try:
                objective = batch_objective(params, batch, weights, cfg.reg, grads, executor, workers)
            except NumericError as e:
                raise NumericError(f"epoch {epoch}, batch {batch_number}: {e}") from e
            adagrad_step(params, grads, state, cfg.learning_rate, cfg.adagrad_epsilon)
            total += objective * len(batch)
    finally:
        if executor is not None:
            executor.shutdown()
    return total / n

def fit(
    model_cfg: ModelConfig,
    data: KGDataset,
    cfg: TrainConfig,
    workers: int = 1,
) -> Tuple[ModelParams, List[HistoryRecord]]:
    """
    Train up to max_epochs, scoring filtered validation MRR every valid_every epochs
    (and at the last epoch). Keeps the best parameters and stops once more than
    `patience` evaluations in a row fail to improve.
    """

    params = init_params(model_cfg.kind, data.vocab, model_cfg.dim, model_cfg.init_scale, cfg.seed)
    state = AdagradState.zeros_like(params)
    history: List[HistoryRecord] = []
    best_params, best_mrr = params.copy(), -np.inf
    stale = 0

    logger.info(
        f"🚀 Training {model_cfg.kind.value} (dim {model_cfg.dim}) with {cfg.reg.kind.value} "
        f"for up to {cfg.max_epochs} epochs"
    )
    for epoch in range(1, cfg.max_epochs + 1):
        objective = train_epoch(params, data.train, data.weights, cfg, state, epoch, workers)
        logger.info(f"Epoch {epoch}: objective {objective:.6f}")
        if epoch % cfg.valid_every and epoch != cfg.max_epochs:
            continue

        valid_mrr = evaluate(params, data.valid, data.filter, workers).mrr
        history.append(HistoryRecord(epoch=epoch, objective=objective, valid_mrr=valid_mrr))
        if valid_mrr > best_mrr:
            best_params, best_mrr, stale = params.copy(), valid_mrr, 0
            logger.info(f"✅ New best validation MRR {valid_mrr:.4f} at epoch {epoch}")
            continue
        stale += 1
        if stale > cfg.patience:
            logger.info(f"Early stop at epoch {epoch}: {stale} evaluations without improvement")
            break

    return best_params, history

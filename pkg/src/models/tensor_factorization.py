"""
Tensor Factorization Models
CP, ComplEx and RESCAL parameters, scoring against all tails, and analytic score gradients
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..core.exceptions import ConfigurationError
from ..domain import ModelKind
from .gradients import GradientBuffer

logger = logging.getLogger(__name__)

HEAD_SIDE = "head"
TAIL_SIDE = "tail"

TABLE_NAMES: Dict[ModelKind, Tuple[str, ...]] = {
    ModelKind.CP: ("entity_head", "entity_tail", "relation"),
    ModelKind.COMPLEX: ("entity", "relation"),
    ModelKind.RESCAL: ("entity", "relation"),
}

@dataclass
class ModelParams:
    """
    Embedding tables of one model.
    ComplEx rows are half-split: the first D/2 entries are real parts, the last D/2 imaginary parts.
    RESCAL relations are stored as a |R| x D x D tensor.
    """

    kind: ModelKind
    dim: int
    tables: Dict[str, np.ndarray]

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        if self.kind is ModelKind.COMPLEX and self.dim % 2:
            raise ConfigurationError(f"ComplEx needs an even dim, got {self.dim}")
        expected = TABLE_NAMES[self.kind]
        if set(self.tables) != set(expected):
            raise ConfigurationError(f"{self.kind.value} expects tables {expected}, got {tuple(self.tables)}")
        self.tables = {name: np.asarray(self.tables[name], dtype=np.float64) for name in expected}
        relation_shape = (self.dim, self.dim) if self.kind is ModelKind.RESCAL else (self.dim,)
        for name, table in self.tables.items():
            tail = relation_shape if name == "relation" else (self.dim,)
            if table.shape[1:] != tail:
                raise ConfigurationError(f"table '{name}' has shape {table.shape}, expected (n,) + {tail}")

    @property
    def head_table(self) -> str:
        return "entity_head" if self.kind is ModelKind.CP else "entity"

    @property
    def tail_table(self) -> str:
        return "entity_tail" if self.kind is ModelKind.CP else "entity"

    @property
    def entity_tables(self) -> Tuple[str, ...]:
        return tuple(name for name in self.tables if name != "relation")

    @property
    def n_entities(self) -> int:
        return self.tables[self.head_table].shape[0]

    @property
    def n_relations(self) -> int:
        return self.tables["relation"].shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(self.kind, self.dim, {name: t.copy() for name, t in self.tables.items()})

    def replace_tables(self, **tables: np.ndarray) -> "ModelParams":
        """Shallow copy with some tables swapped out"""
        return ModelParams(self.kind, self.dim, {**self.tables, **tables})

def init_params(kind: ModelKind, vocab, dim: int, init_scale: float = 1e-3, seed: int = 0) -> ModelParams:
    """Zero-mean Gaussian tables with standard deviation init_scale, deterministic in seed"""

    kind = ModelKind(kind)
    if dim <= 0:
        raise ConfigurationError(f"dim must be positive, got {dim}")
    if kind is ModelKind.COMPLEX and dim % 2:
        raise ConfigurationError(f"ComplEx needs an even dim, got {dim}")

    rng = np.random.default_rng(seed)
    shapes = {
        "entity_head": (vocab.n_entities, dim),
        "entity_tail": (vocab.n_entities, dim),
        "entity": (vocab.n_entities, dim),
        "relation": (vocab.n_relations_total, dim, dim) if kind is ModelKind.RESCAL
        else (vocab.n_relations_total, dim),
    }
    tables = {name: init_scale * rng.standard_normal(shapes[name]) for name in TABLE_NAMES[kind]}
    logger.info(
        f"Initialized {kind.value} with dim {dim}: "
        + ", ".join(f"{name}{tables[name].shape}" for name in tables)
    )
    return ModelParams(kind, dim, tables)

def _halves(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    k = x.shape[-1] // 2
    return x[..., :k], x[..., k:]

def relation_transform(params: ModelParams, x: np.ndarray, relations: np.ndarray, side: str = HEAD_SIDE) -> np.ndarray:
    """
    Rows of x times their relation: x R_j-bar for side="head", x R_j^T for side="tail".
    The head form dotted with a tail row is the score; the tail form dotted with a head row is too.
    """

    rel = params.tables["relation"][relations]
    if params.kind is ModelKind.CP:
        return x * rel
    if params.kind is ModelKind.COMPLEX:
        a, b = _halves(x)
        c, d = _halves(rel)
        if side == HEAD_SIDE:
            return np.concatenate([a * c + b * d, b * c - a * d], axis=-1)
        return np.concatenate([a * c - b * d, a * d + b * c], axis=-1)
    if side == HEAD_SIDE:
        return np.einsum("bd,bde->be", x, rel)
    return np.einsum("bde,be->bd", rel, x)

def relation_transform_vjp(
    params: ModelParams, x: np.ndarray, relations: np.ndarray, side: str, g: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Pull an upstream gradient g through relation_transform: returns (d/dx, d/d relation rows)"""

    rel = params.tables["relation"][relations]
    if params.kind is ModelKind.CP:
        return g * rel, g * x
    if params.kind is ModelKind.COMPLEX:
        a, b = _halves(x)
        c, d = _halves(rel)
        gr, gi = _halves(g)
        if side == HEAD_SIDE:
            dx = np.concatenate([gr * c - gi * d, gr * d + gi * c], axis=-1)
            drel = np.concatenate([gr * a + gi * b, gr * b - gi * a], axis=-1)
        else:
            dx = np.concatenate([gr * c + gi * d, gi * c - gr * d], axis=-1)
            drel = np.concatenate([gr * a + gi * b, gi * a - gr * b], axis=-1)
        return dx, drel
    if side == HEAD_SIDE:
        return np.einsum("bde,be->bd", rel, g), np.einsum("bd,be->bde", x, g)
    return np.einsum("bde,bd->be", rel, g), np.einsum("bd,be->bde", g, x)

def _check_bounds(params: ModelParams, *, entities=(), relations=()) -> None:
    for index in entities:
        if not 0 <= index < params.n_entities:
            raise IndexError(f"entity index {index} out of range [0, {params.n_entities})")
    for index in relations:
        if not 0 <= index < params.n_relations:
            raise IndexError(f"relation index {index} out of range [0, {params.n_relations})")

def score_triple(params: ModelParams, h: int, r: int, t: int) -> float:
    """Re(h-bar R_r t^T) evaluated directly for one triple"""

    _check_bounds(params, entities=(h, t), relations=(r,))
    head = params.tables[params.head_table][h]
    tail = params.tables[params.tail_table][t]
    rel = params.tables["relation"][r]
    if params.kind is ModelKind.CP:
        return float(np.sum(head * rel * tail))
    if params.kind is ModelKind.COMPLEX:
        def to_complex(v: np.ndarray) -> np.ndarray:
            re, im = _halves(v)
            return re + 1j * im

        return float(np.real(np.sum(np.conj(to_complex(head)) * to_complex(rel) * to_complex(tail))))
    return float(head @ rel @ tail)

def score_batch(params: ModelParams, heads: np.ndarray, relations: np.ndarray) -> np.ndarray:
    """|B| x |E| scores: one transformed query per row, then a product with the tail table"""

    heads = np.asarray(heads, dtype=np.int64)
    relations = np.asarray(relations, dtype=np.int64)
    queries = relation_transform(params, params.tables[params.head_table][heads], relations, HEAD_SIDE)
    return queries @ params.tables[params.tail_table].T

def score_all_tails(params: ModelParams, h: int, r: int) -> np.ndarray:
    _check_bounds(params, entities=(h,), relations=(r,))
    return score_batch(params, np.array([h]), np.array([r]))[0]

def accumulate_score_gradients_batch(
    params: ModelParams,
    heads: np.ndarray,
    relations: np.ndarray,
    dscores: np.ndarray,
    grads: GradientBuffer,
) -> None:
    """Backward pass of score_batch for an upstream gradient dscores of shape |B| x |E|"""

    heads = np.asarray(heads, dtype=np.int64)
    relations = np.asarray(relations, dtype=np.int64)
    head_rows = params.tables[params.head_table][heads]
    queries = relation_transform(params, head_rows, relations, HEAD_SIDE)

    grads.add_dense(params.tail_table, dscores.T @ queries)
    dqueries = dscores @ params.tables[params.tail_table]
    dheads, drelations = relation_transform_vjp(params, head_rows, relations, HEAD_SIDE, dqueries)
    grads.add_rows(params.head_table, heads, dheads)
    grads.add_rows("relation", relations, drelations)

def accumulate_score_gradients(
    params: ModelParams, h: int, r: int, dL_dscores: np.ndarray, grads: GradientBuffer
) -> None:
    dL_dscores = np.asarray(dL_dscores, dtype=np.float64)
    if not np.any(dL_dscores):
        return
    accumulate_score_gradients_batch(params, np.array([h]), np.array([r]), dL_dscores[None, :], grads)

"""
Parameter files and embedding export

Binary block layout (little endian): 8-byte magic "KGEMB001", u32 row count, u32 dim,
then row-major float32 values. A model file is one block per table in header order,
with the header itself in a JSON sidecar next to it.
"""

import csv
import logging
from pathlib import Path
from typing import BinaryIO, List, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from ..core.exceptions import ModelFormatError
from ..domain import ModelKind
from .tensor_factorization import TABLE_NAMES, ModelParams

logger = logging.getLogger(__name__)

MAGIC = b"KGEMB001"
_COUNTS = np.dtype("<u4")
_VALUES = np.dtype("<f4")

class ModelHeader(BaseModel):
    """Sidecar describing a parameter file"""

    format: str = MAGIC.decode()
    kind: ModelKind
    dim: int
    tables: List[str]
    n_entities: int
    n_relations: int

def header_path(model_path: Path) -> Path:
    return Path(model_path).with_suffix(".json")

def write_block(f: BinaryIO, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix)
    rows, dim = matrix.shape[0], int(np.prod(matrix.shape[1:]))
    f.write(MAGIC)
    f.write(np.array([rows, dim], dtype=_COUNTS).tobytes())
    f.write(np.ascontiguousarray(matrix.reshape(rows, dim), dtype=_VALUES).tobytes())

def read_block(f: BinaryIO) -> np.ndarray:
    """One block as a float64 rows x dim matrix"""

    magic = f.read(len(MAGIC))
    if magic != MAGIC:
        raise ModelFormatError(f"bad magic bytes {magic!r}, expected {MAGIC!r}")
    counts = f.read(2 * _COUNTS.itemsize)
    if len(counts) != 2 * _COUNTS.itemsize:
        raise ModelFormatError("truncated block header")
    rows, dim = (int(v) for v in np.frombuffer(counts, dtype=_COUNTS))
    payload = f.read(rows * dim * _VALUES.itemsize)
    if len(payload) != rows * dim * _VALUES.itemsize:
        raise ModelFormatError(f"truncated block: expected {rows}x{dim} values")
    return np.frombuffer(payload, dtype=_VALUES).astype(np.float64).reshape(rows, dim)

def save_model(params: ModelParams, path: Path) -> Path:
    """Write the parameter file and its JSON header; values are stored as float32"""

    path = Path(path)
    header = ModelHeader(
        kind=params.kind,
        dim=params.dim,
        tables=list(params.tables),
        n_entities=params.n_entities,
        n_relations=params.n_relations,
    )
    with open(path, "wb") as f:
        for name in header.tables:
            write_block(f, params.tables[name])
    header_path(path).write_text(header.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(f"💾 Saved {params.kind.value} parameters to {path}")
    return path

def load_model(path: Path) -> ModelParams:
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        header = ModelHeader.model_validate_json(header_path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ModelFormatError(f"model header not found: {header_path(path)}") from e
    except ValidationError as e:
        raise ModelFormatError(f"invalid model header: {e}") from e

    if tuple(header.tables) != TABLE_NAMES[header.kind]:
        raise ModelFormatError(f"header lists tables {header.tables} for {header.kind.value}")

    tables = {}
    with open(path, "rb") as f:
        for name in header.tables:
            block = read_block(f)
            rows = header.n_relations if name == "relation" else header.n_entities
            if name == "relation" and header.kind is ModelKind.RESCAL:
                shape: Tuple[int, ...] = (rows, header.dim, header.dim)
            else:
                shape = (rows, header.dim)
            if block.size != int(np.prod(shape)) or block.shape[0] != rows:
                raise ModelFormatError(f"table '{name}' has {block.shape}, header implies {shape}")
            tables[name] = block.reshape(shape)
        if f.read(1):
            raise ModelFormatError("trailing bytes after the last table")
    return ModelParams(header.kind, header.dim, tables)

def export_embeddings(params: ModelParams, entity_names: List[str], directory: Path, fmt: str = "tsv") -> List[Path]:
    """
    Write each entity table as TSV (name followed by D values) or as a binary block.
    CP has separate head and tail tables and produces two files.
    """

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if len(entity_names) != params.n_entities:
        raise ModelFormatError(
            f"{len(entity_names)} entity names for a model with {params.n_entities} entities"
        )

    written = []
    for name in params.entity_tables:
        table = params.tables[name]
        if fmt == "tsv":
            path = directory / f"{name}.tsv"
            pd.DataFrame(table, index=entity_names).to_csv(
                path, sep="\t", header=False, float_format="%.9g", quoting=csv.QUOTE_NONE
            )
        elif fmt == "binary":
            path = directory / f"{name}.bin"
            with open(path, "wb") as f:
                write_block(f, table)
        else:
            raise ValueError(f"unknown export format '{fmt}'")
        written.append(path)
    logger.info(f"📤 Exported {len(written)} entity table(s) to {directory}")
    return written

"""Command line entry point for the knowledge graph completion engine"""

import functools
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

import click
from rich.console import Console
from rich.logging import RichHandler

from . import __version__
from .core.config import RunConfig, load_run_config, settings
from .core.exceptions import ConfigurationError, ContractError, DataError, ModelFormatError, NumericError
from .core.manifest import RunManifest, build_identifier
from .domain import Split
from .models.storage import export_embeddings, load_model, save_model
from .models.tensor_factorization import ModelParams
from .services.duality_check import balance_table, check_params
from .services.evaluation import evaluate, report_table
from .services.kg_data import KGDataset, dump_vocab, file_checksum, load_dataset, load_vocab
from .services.sparsity import sparsity_mrr_sweep
from .services.training import fit

logger = logging.getLogger(__name__)
console = Console(stderr=True)

MODEL_FILE = "model.bin"
HISTORY_FILE = "history.jsonl"
REPORT_FILE = "report.json"
MANIFEST_FILE = "manifest.json"

def configure_logging(level: str) -> None:
    numeric = logging.getLevelName(level.upper())
    logging.basicConfig(
        level=numeric if isinstance(numeric, int) else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )

def _fail(category: str, code: int, reason: str) -> None:
    click.echo(f"error={category} reason={json.dumps(reason)}", err=True)
    sys.exit(code)

def handle_errors(func):
    """Map library exceptions to exit codes: 1 config, 2 data or I/O, 3 numeric"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigurationError as e:
            _fail("config", 1, str(e))
        except (DataError, ContractError) as e:
            _fail("data", 2, str(e))
        except OSError as e:
            _fail("io", 2, str(e))
        except NumericError as e:
            _fail("numeric", 3, str(e))

    return wrapper

def workers_option(func):
    return click.option(
        "--workers",
        type=click.IntRange(min=1),
        default=None,
        help="Worker threads for batch gradients and ranking (default: KGE_WORKERS)",
    )(func)

def _load_data(config: RunConfig) -> KGDataset:
    paths = config.paths
    return load_dataset(paths.train, paths.valid, paths.test, w0=config.train.w0)

def _load_compatible_model(model_path: Path, data: KGDataset) -> ModelParams:
    params = load_model(model_path)
    vocab = data.vocab
    if params.n_entities != vocab.n_entities or params.n_relations != vocab.n_relations_total:
        raise ModelFormatError(
            f"model has {params.n_entities} entities and {params.n_relations} relations, "
            f"dataset has {vocab.n_entities} and {vocab.n_relations_total}"
        )
    return params

def _checksums(config: RunConfig) -> Dict[str, str]:
    return {
        split: file_checksum(getattr(config.paths, split))
        for split in (Split.TRAIN.value, Split.VALID.value, Split.TEST.value)
    }

def _write_manifest(
    path: Path,
    command: str,
    started_at: datetime,
    config: Optional[RunConfig] = None,
    model_path: Optional[Path] = None,
) -> None:
    """Config and data checksums when a config was read, plus the model file when one was"""

    RunManifest(
        command=command,
        config=config.resolved_items() if config else {},
        seed=config.train.seed if config else None,
        dataset_checksums=_checksums(config) if config else {},
        model_path=str(model_path) if model_path else None,
        model_checksum=file_checksum(model_path) if model_path else None,
        build=build_identifier(),
        started_at=started_at,
        finished_at=datetime.now(timezone.utc),
    ).write(path)

def _sweep_manifest_path(out_path: Path) -> Path:
    """sweep.csv -> sweep.manifest.json"""
    return out_path.with_suffix(".manifest.json")

def _parse_targets(raw: str) -> List[float]:
    try:
        targets = [float(item) for item in raw.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigurationError(f"targets must be comma separated numbers: {raw}") from e
    if not targets or any(not 0.0 <= t <= 1.0 for t in targets):
        raise ConfigurationError(f"targets must be numbers in [0, 1]: {raw}")
    return targets

@click.group()
@click.version_option(__version__, prog_name="kge")
def cli():
    """Knowledge graph completion with tensor factorization models"""
    configure_logging(settings.log)

@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="Run config file")
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory")
@workers_option
@handle_errors
def train(config_path: Path, out_dir: Path, workers):
    """Train a model and write parameters, vocabulary, history, report and manifest"""

    started_at = datetime.now(timezone.utc)
    workers = workers or settings.workers
    config = load_run_config(config_path)
    data = _load_data(config)
    out_dir.mkdir(parents=True, exist_ok=True)

    best, history = fit(config.model, data, config.train, workers)
    model_path = save_model(best, out_dir / MODEL_FILE)
    dump_vocab(data.vocab, out_dir)
    (out_dir / HISTORY_FILE).write_text(
        "".join(record.model_dump_json() + "\n" for record in history), encoding="utf-8"
    )

    # Report on the stored float32 values so `evaluate` reproduces it
    saved = load_model(model_path)
    reports = {
        Split.VALID.value: evaluate(saved, data.valid, data.filter, workers),
        Split.TEST.value: evaluate(saved, data.test, data.filter, workers),
    }
    (out_dir / REPORT_FILE).write_text(
        json.dumps({split: report.record() for split, report in reports.items()}, indent=2) + "\n",
        encoding="utf-8",
    )
    _write_manifest(out_dir / MANIFEST_FILE, "train", started_at, config)

    for split, report in reports.items():
        console.print(report_table(report, title=f"{config.model.kind.value} on {split}"))
    click.echo(json.dumps({split: report.record() for split, report in reports.items()}))

@cli.command(name="evaluate")
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path), help="Saved model file")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="Run config file")
@click.option("--split", type=click.Choice([Split.VALID.value, Split.TEST.value]), default=Split.TEST.value)
@workers_option
@handle_errors
def evaluate_command(model_path: Path, config_path: Path, split: str, workers):
    """Filtered MRR and Hits@{1,3,10} of a saved model"""

    workers = workers or settings.workers
    config = load_run_config(config_path)
    data = _load_data(config)
    params = _load_compatible_model(model_path, data)
    report = evaluate(params, getattr(data, split), data.filter, workers)
    console.print(report_table(report, title=f"{params.kind.value} on {split}"))
    click.echo(json.dumps(report.record()))

@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path), help="Saved model file")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path), help="Run config file")
@click.option("--targets", default="0,0.2,0.4,0.6,0.8", show_default=True, help="Comma separated sparsity targets")
@click.option("--split", type=click.Choice([Split.VALID.value, Split.TEST.value]), default=Split.TEST.value)
@click.option("--out", "out_path", type=click.Path(path_type=Path), default=None, help="CSV file (default: stdout)")
@workers_option
@handle_errors
def sparsify(model_path: Path, config_path: Path, targets: str, split: str, out_path, workers):
    """Sweep entity-embedding sparsity and record MRR and CSR storage"""

    started_at = datetime.now(timezone.utc)
    workers = workers or settings.workers
    target_list = _parse_targets(targets)
    config = load_run_config(config_path)
    data = _load_data(config)
    params = _load_compatible_model(model_path, data)
    sweep = sparsity_mrr_sweep(params, getattr(data, split), data.filter, target_list, workers)
    if out_path is None:
        sweep.to_csv(sys.stdout)
    else:
        sweep.to_csv(out_path)
        _write_manifest(_sweep_manifest_path(out_path), "sparsify", started_at, config, model_path)
        logger.info(f"📝 Sweep written to {out_path}")

@cli.command(name="check-duality")
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path), help="Saved CP model file")
@handle_errors
def check_duality(model_path: Path):
    """Balance-condition residuals of a CP model before and after rebalancing"""

    before, after = check_params(load_model(model_path))
    console.print(balance_table(before, after))
    click.echo(json.dumps({"before": before.as_record(), "after": after.as_record()}))

@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(path_type=Path), help="Saved model file")
@click.option("--format", "fmt", type=click.Choice(["tsv", "binary"]), default="tsv", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path), help="Output directory")
@handle_errors
def export(model_path: Path, fmt: str, out_dir: Path):
    """Write entity embeddings; names come from entities.tsv next to the model"""

    started_at = datetime.now(timezone.utc)
    params = load_model(model_path)
    vocab = load_vocab(model_path.parent)
    paths = export_embeddings(params, vocab.entity_names, out_dir, fmt)
    _write_manifest(out_dir / MANIFEST_FILE, "export", started_at, model_path=model_path)
    for path in paths:
        click.echo(str(path))

if __name__ == "__main__":
    cli()

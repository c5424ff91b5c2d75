"""Configuration for the knowledge graph completion engine"""

from pathlib import Path
from typing import Dict, Any, Mapping

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..domain import ModelKind, RegularizerKind
from .exceptions import ConfigurationError

class Settings(BaseSettings):
    """Process-level settings, read from KGE_* environment variables"""

    # Logging
    log: str = "WARNING"

    # Parallelism
    workers: int = Field(1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="KGE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

settings = Settings()

class RegularizerSpec(BaseModel):
    """Which penalty to apply and with which coefficients"""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    kind: RegularizerKind = RegularizerKind.NONE
    lambda_: float = Field(0.0, ge=0.0, alias="lambda")
    # Only read by DURA
    lambda1: float = Field(1.0, ge=0.0)
    lambda2: float = Field(1.0, ge=0.0)

class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: ModelKind
    dim: int = Field(gt=0)
    init_scale: float = Field(1e-3, ge=0.0)

    @model_validator(mode="after")
    def _complex_needs_even_dim(self) -> "ModelConfig":
        if self.kind is ModelKind.COMPLEX and self.dim % 2:
            raise ValueError(f"ComplEx needs an even dim, got {self.dim}")
        return self

class TrainConfig(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    batch_size: int = Field(100, ge=1)
    max_epochs: int = Field(50, ge=1)
    learning_rate: float = Field(0.1, gt=0.0, alias="lr")
    adagrad_epsilon: float = Field(1e-10, gt=0.0)
    w0: float = Field(0.0, ge=0.0, le=1.0)
    valid_every: int = Field(5, ge=1)
    patience: int = Field(5, ge=0)
    seed: int = Field(0, ge=0)
    reg: RegularizerSpec = Field(default_factory=RegularizerSpec)

class PathsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    train: Path
    valid: Path
    test: Path

class RunConfig(BaseModel):
    """Everything a run needs, as read from one flat key=value file"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    model: ModelConfig
    train: TrainConfig = Field(default_factory=TrainConfig)
    paths: PathsConfig

    def resolved_items(self) -> Dict[str, str]:
        """Flatten back to sorted key=value pairs, defaults included"""
        items: Dict[str, str] = {}
        sections = {
            "model": self.model.model_dump(mode="json", by_alias=True),
            "train": self.train.model_dump(mode="json", by_alias=True, exclude={"reg"}),
            "reg": self.train.reg.model_dump(mode="json", by_alias=True),
            "paths": self.paths.model_dump(mode="json", by_alias=True),
        }
        for section, values in sections.items():
            for name, value in values.items():
                items[f"{section}.{name}"] = str(value)
        return dict(sorted(items.items()))

_SECTIONS = ("model", "train", "reg", "paths")

def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]).replace("train.reg.", "reg.")
        parts.append(f"{location or 'config'}: {item['msg']}")
    return "; ".join(parts)

def parse_run_config(values: Mapping[str, Any], base_dir: Path = Path(".")) -> RunConfig:
    """Group flat dotted keys into sections and validate them"""

    nested: Dict[str, Dict[str, Any]] = {section: {} for section in _SECTIONS}
    for key, value in values.items():
        section, _, name = key.strip().partition(".")
        if section not in nested or not name:
            raise ConfigurationError(f"unknown config key '{key}'")
        if value is None or str(value).strip() == "":
            raise ConfigurationError(f"config key '{key}' has no value")
        if section == "paths" and not Path(value).is_absolute():
            value = str(base_dir / value)
        nested[section][name] = value

    reg = nested.pop("reg")
    nested["train"]["reg"] = reg
    try:
        return RunConfig.model_validate(nested)
    except ValidationError as e:
        raise ConfigurationError(_describe(e)) from e

def load_run_config(path: Path) -> RunConfig:
    """Read a flat key=value run config; relative data paths resolve against its directory"""

    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        values = dotenv_values(path, encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ConfigurationError(f"config file is not valid UTF-8: {path}") from e
    return parse_run_config(values, base_dir=path.parent)

def format_run_config(items: Mapping[str, Any]) -> str:
    """Render key=value pairs in the format load_run_config reads"""
    return "".join(f"{key}={value}\n" for key, value in items.items())

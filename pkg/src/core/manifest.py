"""Run manifest written alongside every command's outputs"""

import logging
import subprocess
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

from pydantic import BaseModel, Field

from .. import __version__

logger = logging.getLogger(__name__)

class RunManifest(BaseModel):
    command: str
    config: Dict[str, str] = Field(default_factory=dict)
    seed: Optional[int] = None
    dataset_checksums: Dict[str, str] = Field(default_factory=dict)
    model_path: Optional[str] = None
    model_checksum: Optional[str] = None
    build: str
    started_at: datetime
    finished_at: datetime

    def write(self, path: Path) -> Path:
        path = Path(path)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

def build_identifier() -> str:
    """git describe of the source tree, or the package version outside a checkout"""

    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if result.returncode == 0 and result.stdout.strip():
            return result.stdout.strip()
    except (OSError, subprocess.SubprocessError) as e:
        logger.debug(f"git describe unavailable: {e}")
    return f"v{__version__}"

"""Content-addressed run directories written atomically."""
import hashlib
import json
import logging
import shutil
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional

from .config import MANIFEST_NAME, RUN_ROOT
from .schemas import RunManifest

logger = logging.getLogger(__name__)


def config_hash(command: str, config: Dict[str, Any], seed: Optional[int] = None) -> str:
    payload = json.dumps({"command": command, "config": config, "seed": seed}, sort_keys=True, default=str)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


def run_dir_for(command: str, config: Dict[str, Any], seed: Optional[int] = None,
                root: str | Path | None = None) -> Path:
    return Path(root or RUN_ROOT) / f"{command}-{config_hash(command, config, seed)}"


@contextmanager
def staged_run(final_dir: Path) -> Iterator[Path]:
    """Yield a staging directory that replaces ``final_dir`` only if the block succeeds."""
    staging = final_dir.with_name(final_dir.name + ".partial")
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if final_dir.exists():
        shutil.rmtree(final_dir)
    staging.rename(final_dir)


def write_manifest(run_dir: Path, manifest: RunManifest) -> Path:
    path = run_dir / MANIFEST_NAME
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def read_manifest(run_dir: Path) -> RunManifest:
    return RunManifest.model_validate_json((run_dir / MANIFEST_NAME).read_text(encoding="utf-8"))


def relocate(artifacts: Dict[str, str], staging: Path, final_dir: Path) -> Dict[str, str]:
    """Artifact paths as they will read once the staging directory is renamed."""
    return {
        name: str(final_dir / Path(path).relative_to(staging)) if Path(path).is_relative_to(staging) else path
        for name, path in artifacts.items()
    }

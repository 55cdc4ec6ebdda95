import logging
import os
from pathlib import Path

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: str | None = None) -> None:
    level = level or os.getenv("DYNOOD_LOG_LEVEL", "INFO")
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT)


def get_failed_runs_logger(run_root: str | Path) -> logging.Logger:
    """Dedicated logger for failed sweep cells, written next to the runs."""
    failed_logger = logging.getLogger("failed_runs")
    target = str(Path(run_root) / "failed_runs.log")
    if not any(getattr(h, "baseFilename", None) == os.path.abspath(target) for h in failed_logger.handlers):
        Path(run_root).mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(target)
        handler.setLevel(logging.ERROR)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        failed_logger.addHandler(handler)
    return failed_logger

from .commands import resolve_train_config, run_eval, run_generate, run_sweep, run_train, run_validate
from .main import main

__all__ = ["main", "resolve_train_config", "run_eval", "run_generate", "run_sweep", "run_train", "run_validate"]

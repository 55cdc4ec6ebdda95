"""Checkpoint container: parameters, the generated sample library per timestamp and M_I."""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import torch

from .. import __version__
from ..intervention.schemas import SampleLibrary
from ..shared.exceptions import ConfigurationError
from ..shared.tensor_store import load_tensors, save_tensors
from .config import CHECKPOINT_FORMAT
from .models import DynoodModel
from .schemas import TrainConfig

logger = logging.getLogger(__name__)

PARAM_PREFIX = "param/"
GENERATED_PREFIX = "library/generated/t"


def save_checkpoint(
    path: str | Path,
    model: DynoodModel,
    library: Optional[SampleLibrary] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> None:
    tensors: Dict[str, Any] = {PARAM_PREFIX + name: value for name, value in model.state_dict().items()}
    if library is not None:
        for t in torch.unique(library.generated_timestamps).tolist():
            tensors[f"{GENERATED_PREFIX}{t}"] = library.generated[library.generated_timestamps == t]
    if model.mask.gate.numel():
        tensors["mask/invariant"] = model.mask.pair().invariant
    metadata = {
        "format": CHECKPOINT_FORMAT,
        "version": __version__,
        "config": model.cfg.model_dump(mode="json"),
        "input_dim": model.input_dim,
        "num_classes": model.num_classes,
        "num_nodes": int(model.mask.gate.shape[0]),
        "rep_dim": model.rep_dim,
        "dtype": str(next(model.parameters()).dtype).replace("torch.", ""),
    }
    metadata.update(extra or {})
    save_tensors(path, tensors, metadata)
    logger.info(f"Checkpoint written to {path}")


def load_checkpoint(path: str | Path) -> Tuple[DynoodModel, Dict[str, np.ndarray], Dict[str, Any]]:
    """Rebuild the model; also returns the generated library grouped by timestamp and the metadata."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Checkpoint not found: {path}")
    tensors, metadata = load_tensors(path)
    if metadata.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError(f"{path} is not a checkpoint (format {metadata.get('format')!r})")
    cfg = TrainConfig.model_validate(metadata["config"])
    dtype = getattr(torch, metadata.get("dtype", "float32"))
    model = DynoodModel(cfg, metadata["input_dim"], metadata["num_classes"]).to(dtype)
    state = {
        name[len(PARAM_PREFIX):]: torch.from_numpy(np.array(value))
        for name, value in tensors.items() if name.startswith(PARAM_PREFIX)
    }
    # the gate buffer is sized by the training graph
    model.mask.gate = torch.empty_like(state["mask.gate"])
    model.load_state_dict(state)
    generated = {
        int(name[len(GENERATED_PREFIX):]): value
        for name, value in tensors.items() if name.startswith(GENERATED_PREFIX)
    }
    return model, generated, metadata

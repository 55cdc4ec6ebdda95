from .checkpoint import load_checkpoint, save_checkpoint
from .inference import predict
from .losses import task_loss, total_loss
from .models import DynoodModel, Predictor
from .schemas import Ablation, EpochRecord, TrainConfig, TrainResult
from .targets import TaskTargets, task_targets
from .trainer import Trainer, compute_losses, train, write_history

__all__ = [
    "Ablation",
    "DynoodModel",
    "EpochRecord",
    "Predictor",
    "TaskTargets",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "compute_losses",
    "load_checkpoint",
    "predict",
    "save_checkpoint",
    "task_loss",
    "task_targets",
    "total_loss",
    "train",
    "write_history",
]

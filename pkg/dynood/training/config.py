DEFAULT_EPOCHS = 100
DEFAULT_LEARNING_RATE = 1e-3
DEFAULT_BETA1 = 0.1
DEFAULT_BETA2 = 0.01
DEFAULT_NEGATIVE_RATIO = 1
# Logit clamp applied before the cross-entropy losses
LOGIT_CLAMP = 30.0

HISTORY_COLUMNS = ["epoch", "l_task", "l_risk", "l_svae", "l_s", "l_d", "val_metric", "l_total", "wall_time"]
CHECKPOINT_FORMAT = "dynood-checkpoint-1"

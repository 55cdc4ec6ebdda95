# Intervention rounds per epoch (S); the variance needs at least two
DEFAULT_ROUNDS = 4
# Fraction of nodes targeted per round
DEFAULT_RATIO = 1.0
# Probability that a replacement is drawn from the generated library
DEFAULT_GENERATED_FRACTION = 0.5
# Generated samples per timestamp refreshed each epoch
DEFAULT_GENERATED_PER_TIMESTAMP = 32

TRACE_COLUMNS = ["round", "node", "timestamp", "source", "sample_id", "loss"]

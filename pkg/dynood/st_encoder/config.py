# Encoder defaults
DEFAULT_HIDDEN_DIM = 32
DEFAULT_LAYERS = 2
DEFAULT_HEADS = 4
NEGATIVE_SLOPE = 0.2

# Sinusoidal relative time encoding
RTE_BASE = 10000.0

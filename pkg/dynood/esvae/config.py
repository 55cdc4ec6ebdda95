# Latent sizes
DEFAULT_STATIC_DIM = 8
DEFAULT_DYNAMIC_DIM = 16
DEFAULT_DECODER_HIDDEN = 32

# Pseudo-label task
DEFAULT_CLUSTERS = 10
DEFAULT_TOP_K = 3
KMEANS_RESTARTS = 10

# Loss defaults
DEFAULT_MARGIN = 1.0
DEFAULT_ALPHA = 0.1

# log sigma^2 is clamped to this interval everywhere
LOGVAR_MIN = -8.0
LOGVAR_MAX = 8.0

# Stochastic block model at desk scale
SBM_NODES = 500
SBM_TIMESTAMPS = 8
SBM_BLOCKS = 3
SBM_P_INTRA = 0.05
SBM_P_INTER = 0.005
SBM_INVARIANT_WEIGHT = 0.5
SBM_FEATURE_DIM = 8

# Factorisation of sampled future links into shifted features
FACTOR_DIM = 16
FACTOR_MAX_ITERATIONS = 500
FACTOR_MIN_ITERATIONS = 100
FACTOR_LEARNING_RATE = 1.0
FACTOR_WEIGHT_DECAY = 2.0
FACTOR_INIT_STD = 0.5
FACTOR_TOLERANCE = 1e-4

# Environment suites
ENV_NODES = 200
ENV_TIMESTAMPS = 10
ENV_FACTORS = 2
ENV_FEATURE_DIM = 8
ENV_LOW_NOISE = 0.1
ENV_HIGH_NOISE = 1.0
ENV_TARGET_DEGREE = 8.0
ENV_OOD_TAG = "K1"

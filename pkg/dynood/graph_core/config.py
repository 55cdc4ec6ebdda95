import os

# Dataset file format
FORMAT_MAGIC = "EVG1"
DATASET_SUFFIX = ".evg"
PROVENANCE_SUFFIX = ".prov"
SPLITS_SUFFIX = ".splits"

# Features of nodes inactive at t: "carry" the last seen row forward, or "zero" them
INACTIVE_FEATURES = os.getenv("DYNOOD_INACTIVE_FEATURES", "zero")

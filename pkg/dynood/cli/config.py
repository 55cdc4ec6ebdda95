import os

from ..graph_core.config import DATASET_SUFFIX

# Run settings
RUN_ROOT = os.getenv("DYNOOD_RUN_ROOT", "runs")
SWEEP_WORKERS = int(os.getenv("DYNOOD_SWEEP_WORKERS", 2))

# Artifact names inside a run directory
MANIFEST_NAME = "manifest.json"
DATASET_NAME = f"dataset{DATASET_SUFFIX}"
CHECKPOINT_NAME = "checkpoint.ntc"
HISTORY_NAME = "history.csv"
NEGATIVES_NAME = "negatives.ntc"
MASK_NAME = "mask.txt"
ASSIGNMENTS_NAME = "assignments.txt"
REPORT_CSV_NAME = "report.csv"
REPORT_TEXT_NAME = "report.txt"
SUMMARY_NAME = "summary.csv"
SERIES_NAME = "series.csv"

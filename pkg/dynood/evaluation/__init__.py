from .metrics import accuracy, auc, auc_arrays
from .negatives import load_negatives, sample_negative_pairs, save_negatives
from .ood import ood_split_links, parse_rule
from .report import render_text, report, series, trend_spearman, write_report, write_series
from .schemas import EvalReport, SeriesPoint

__all__ = [
    "EvalReport",
    "SeriesPoint",
    "accuracy",
    "auc",
    "auc_arrays",
    "load_negatives",
    "ood_split_links",
    "parse_rule",
    "render_text",
    "report",
    "sample_negative_pairs",
    "save_negatives",
    "series",
    "trend_spearman",
    "write_report",
    "write_series",
]

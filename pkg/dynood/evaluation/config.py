
# Seeds per reported cell
DEFAULT_SEEDS = 5
REPORT_COLUMNS = ["metric", "value", "std", "value_ood", "std_ood", "delta", "delta_pct", "seeds"]

"""Per-seed aggregation and table rendering."""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from ..shared.exceptions import ContractViolation
from .config import REPORT_COLUMNS
from .schemas import EvalReport, SeriesPoint


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    values = np.asarray(values, dtype=np.float64)
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), std


def report(
    runs: Sequence[Tuple[float, Optional[float]]],
    metric: str = "auc",
    seeds: Optional[Sequence[int]] = None,
) -> EvalReport:
    """``runs`` holds one (w/o OOD, w/ OOD) pair per seed; the OOD value may be None."""
    if not runs:
        raise ContractViolation("report needs at least one seed")
    seeds = list(seeds) if seeds is not None else list(range(len(runs)))
    in_values = [float(v_in) for v_in, _ in runs]
    value, std = _mean_std(in_values)
    ood_values = [float(v_ood) for _, v_ood in runs if v_ood is not None]
    if not ood_values:
        return EvalReport(metric=metric, value=value, std=std, seeds=seeds, per_seed=in_values)
    if len(ood_values) != len(runs):
        raise ContractViolation("either every seed or none has an OOD value")
    value_ood, std_ood = _mean_std(ood_values)
    delta = value - value_ood
    delta_pct = 100.0 * delta / value if value > 0 else None
    return EvalReport(
        metric=metric, value=value, std=std, value_ood=value_ood, std_ood=std_ood,
        delta=delta, delta_pct=delta_pct, seeds=seeds, per_seed=in_values, per_seed_ood=ood_values,
    )


def report_frame(reports: List[EvalReport]) -> pd.DataFrame:
    rows = []
    for item in reports:
        row = item.model_dump(include=set(REPORT_COLUMNS))
        row["seeds"] = " ".join(str(seed) for seed in item.seeds)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    return frame.dropna(axis=1, how="all")


def render_text(reports: List[EvalReport]) -> str:
    """Aligned plain-text table; values to 4 decimals, the drop to 2."""
    frame = report_frame(reports)
    formatters = {
        column: (lambda x: f"{x:.2f}%") if column == "delta_pct" else (lambda x: f"{x:.4f}")
        for column in frame.columns if column not in ("metric", "seeds")
    }
    return frame.to_string(index=False, formatters=formatters, na_rep="-") + "\n"


def write_report(reports: List[EvalReport], csv_path: str | Path, text_path: str | Path) -> None:
    report_frame(reports).to_csv(csv_path, index=False, float_format="%.6f")
    Path(text_path).write_text(render_text(reports), encoding="utf-8")


def trend_spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman rank correlation of seed-means against a swept parameter."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ContractViolation("trend needs two or more (x, y) points of equal count")
    return float(spearmanr(xs, ys)[0])


def series(xs: Sequence[float], per_seed: Sequence[Sequence[float]]) -> List[SeriesPoint]:
    points = []
    for x, values in zip(xs, per_seed):
        mean, std = _mean_std(values)
        points.append(SeriesPoint(x=float(x), mean=mean, std=std))
    return points


def write_series(points: List[SeriesPoint], path: str | Path) -> None:
    """Plot data: one ``x, mean, std`` row per point."""
    pd.DataFrame([p.model_dump() for p in points], columns=["x", "mean", "std"]).to_csv(path, index=False)

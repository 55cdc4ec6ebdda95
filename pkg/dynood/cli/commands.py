"""Implementations behind the command-line entry points."""
import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .. import __version__
from ..esvae.pseudo_labels import export_assignments
from ..evaluation.config import DEFAULT_SEEDS
from ..evaluation.negatives import load_negatives, sample_negative_pairs, save_negatives
from ..evaluation.ood import parse_rule
from ..evaluation.report import report, series, write_report, write_series
from ..evaluation.runner import evaluate_pair
from ..graph_core.graph import validate
from ..graph_core.schemas import LabelKind, Violation
from ..graph_core.storage import load, load_splits, splits_path
from ..invariance.masks import export_mask_text
from ..shared.exceptions import EXIT_INTERNAL_ERROR, ConfigurationError, DynoodError
from ..shared.kv_config import apply_overrides, build_model, read_kv_file
from ..shared.logging_utils import get_failed_runs_logger
from ..synthetic_data.generate import generate, parse_spec, write_dataset
from ..training.checkpoint import load_checkpoint, save_checkpoint
from ..training.inference import check_compatible
from ..training.schemas import TrainConfig
from ..training.trainer import train, write_history
from .config import (
    ASSIGNMENTS_NAME,
    CHECKPOINT_NAME,
    DATASET_NAME,
    HISTORY_NAME,
    MANIFEST_NAME,
    MASK_NAME,
    NEGATIVES_NAME,
    REPORT_CSV_NAME,
    REPORT_TEXT_NAME,
    RUN_ROOT,
    SERIES_NAME,
    SUMMARY_NAME,
    SWEEP_WORKERS,
)
from .runs import relocate, run_dir_for, staged_run, write_manifest
from .schemas import RunManifest

logger = logging.getLogger(__name__)

Overrides = Sequence[Tuple[str, str]]


def run_generate(spec_path: str, overrides: Overrides = (), out: Optional[str] = None,
                 root: Optional[str] = None) -> Tuple[Path, RunManifest]:
    started = time.perf_counter()
    raw = apply_overrides(read_kv_file(spec_path), overrides)
    spec = parse_spec(raw)
    resolved = spec.model_dump(mode="json")
    final_dir = Path(out) if out else run_dir_for("generate", resolved, spec.seed, root)
    if out and final_dir.exists() and not (final_dir / MANIFEST_NAME).is_file():
        raise ConfigurationError(f"{final_dir} exists and is not a run directory")
    with staged_run(final_dir) as staging:
        dataset = generate(spec)
        artifacts = write_dataset(dataset, staging / DATASET_NAME)
        manifest = RunManifest(
            command="generate",
            config_path=str(Path(spec_path).resolve()),
            config=resolved,
            seed=spec.seed,
            artifacts=relocate(artifacts, staging, final_dir),
            results={
                "task": dataset.task,
                "ood_rule": dataset.ood_rule,
                "splits": {name: list(span) for name, span in dataset.splits.items()},
                "clipped_probabilities": dataset.clipped,
            },
            version=__version__,
            wall_time=time.perf_counter() - started,
        )
        write_manifest(staging, manifest)
    logger.info(f"Dataset written to {final_dir}")
    return final_dir, manifest


def _resolve_dataset(value: str, config_path: str | Path) -> str:
    path = Path(value)
    if not path.is_absolute():
        beside = Path(config_path).parent / path
        path = beside if beside.exists() else path
    if not path.is_file():
        raise ConfigurationError(f"Dataset not found: {value}")
    return str(path.resolve())


def resolve_train_config(config_path: str, overrides: Overrides = (),
                         ablation: Optional[str] = None) -> TrainConfig:
    """Config file, then ``--key value`` overrides, then split defaults from the dataset sidecar."""
    config_path = Path(config_path)
    raw = apply_overrides(read_kv_file(config_path), overrides)
    if not raw.get("dataset"):
        raise ConfigurationError("missing required key 'dataset'")
    raw["dataset"] = _resolve_dataset(raw["dataset"], config_path)
    for name, span in load_splits(splits_path(raw["dataset"])).items():
        raw.setdefault(f"{name}_range", f"{span[0]}-{span[1]}")
    cfg = build_model(TrainConfig, raw)
    if ablation:
        cfg = cfg.with_ablation(ablation)
    return cfg


def run_train(config_path: str, overrides: Overrides = (), ablation: Optional[str] = None,
              root: Optional[str] = None) -> Tuple[Path, RunManifest]:
    started = time.perf_counter()
    cfg = resolve_train_config(config_path, overrides, ablation)
    resolved = cfg.model_dump(mode="json")
    final_dir = run_dir_for("train", resolved, cfg.seed, root)
    g = load(cfg.dataset)
    with staged_run(final_dir) as staging:
        result = train(g, cfg)
        artifacts = {
            "checkpoint": str(staging / CHECKPOINT_NAME),
            "history": str(staging / HISTORY_NAME),
            "mask": str(staging / MASK_NAME),
        }
        save_checkpoint(artifacts["checkpoint"], result.model, result.library,
                        extra={"best_epoch": result.best_epoch, "best_val": result.best_val})
        write_history(result.history, artifacts["history"])
        export_mask_text(result.model.mask.pair().invariant, artifacts["mask"])
        if result.pseudo_labels is not None:
            artifacts["assignments"] = str(staging / ASSIGNMENTS_NAME)
            export_assignments(result.pseudo_labels, artifacts["assignments"])

        negatives = None
        if cfg.task == LabelKind.LINK_OCCURRENCE:
            negatives = sample_negative_pairs(g, cfg.test_range, cfg.seed, cfg.negative_ratio)
            artifacts["negatives"] = str(staging / NEGATIVES_NAME)
            save_negatives(negatives, artifacts["negatives"], cfg.seed)
        in_dist, shifted = evaluate_pair(result.model, g, cfg.test_range, cfg.ood_rule, negatives, cfg.seed)
        results = {
            "best_epoch": result.best_epoch,
            "best_val": result.best_val,
            "final_val": result.history[-1].val_metric,
            "test_metric": in_dist.mean,
            "num_nodes": g.node_count,
            "input_dim": g.feature_dim,
            "rep_dim": cfg.hidden_dim,
        }
        if shifted is not None:
            results["test_metric_ood"] = shifted.mean
        manifest = RunManifest(
            command="train",
            config_path=str(Path(config_path).resolve()),
            config=resolved,
            seed=cfg.seed,
            variant=cfg.ablation.value,
            artifacts=relocate(artifacts, staging, final_dir),
            results=results,
            version=__version__,
            wall_time=time.perf_counter() - started,
        )
        write_manifest(staging, manifest)
    logger.info(f"Training run written to {final_dir} (test metric {in_dist.mean:.4f})")
    return final_dir, manifest


def run_eval(checkpoints: Sequence[str], dataset: Optional[str] = None, split: str = "test",
             protocol: str = "standard", ood_rule: Optional[str] = None,
             root: Optional[str] = None) -> Tuple[Path, RunManifest, str]:
    """One report row over the given checkpoints (one per seed)."""
    started = time.perf_counter()
    missing = [path for path in checkpoints if not Path(path).is_file()]
    if missing:
        raise ConfigurationError(f"Checkpoint not found: {', '.join(missing)}")
    loaded = [load_checkpoint(path) for path in checkpoints]
    dataset = dataset or loaded[0][0].cfg.dataset
    g = load(dataset)
    runs, seeds = [], []
    metric = None
    for path, (model, _, _) in zip(checkpoints, loaded):
        check_compatible(g, model)
        cfg = model.cfg
        rule = ""
        if protocol == "ood":
            rule = ood_rule if ood_rule is not None else cfg.ood_rule
            if not parse_rule(rule):
                raise ConfigurationError("the ood protocol needs an OOD rule (--ood-rule or ood_rule in the config)")
        span = getattr(cfg, f"{split}_range")
        stored = Path(path).with_name(NEGATIVES_NAME)
        negatives = load_negatives(stored) if split == "test" and stored.is_file() else None
        in_dist, shifted = evaluate_pair(model, g, span, rule, negatives, cfg.seed)
        runs.append((in_dist.mean, shifted.mean if shifted is not None else None))
        seeds.append(cfg.seed)
        metric = "auc" if cfg.task == LabelKind.LINK_OCCURRENCE else "accuracy"

    cell = report(runs, metric=metric, seeds=seeds)
    resolved = {
        "checkpoints": [str(Path(p).resolve()) for p in checkpoints],
        "dataset": str(Path(dataset).resolve()),
        "split": split,
        "protocol": protocol,
        "ood_rule": ood_rule,
    }
    final_dir = run_dir_for("eval", resolved, None, root)
    with staged_run(final_dir) as staging:
        artifacts = {"report_csv": str(staging / REPORT_CSV_NAME), "report_text": str(staging / REPORT_TEXT_NAME)}
        write_report([cell], artifacts["report_csv"], artifacts["report_text"])
        text = Path(artifacts["report_text"]).read_text(encoding="utf-8")
        manifest = RunManifest(
            command="eval",
            config=resolved,
            artifacts=relocate(artifacts, staging, final_dir),
            results=cell.model_dump(),
            version=__version__,
            wall_time=time.perf_counter() - started,
        )
        write_manifest(staging, manifest)
    return final_dir, manifest, text


def parse_grid(entries: Sequence[str]) -> Dict[str, List[str]]:
    grid: Dict[str, List[str]] = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigurationError(f"grid entry {entry!r} must look like key=v1,v2")
        key, values = (part.strip() for part in entry.split("=", 1))
        key = key.replace("-", "_")
        if key not in TrainConfig.model_fields:
            raise ConfigurationError(f"unknown grid key {key!r}")
        grid[key] = [v.strip() for v in values.split(",") if v.strip()]
        if not grid[key]:
            raise ConfigurationError(f"grid key {key!r} has no values")
    return grid


def run_sweep(config_path: str, grid_entries: Sequence[str] = (), seeds: Optional[Sequence[int]] = None,
              overrides: Overrides = (), ablation: Optional[str] = None, workers: Optional[int] = None,
              root: Optional[str] = None) -> Tuple[Path, RunManifest, int]:
    """One child training run per grid cell and seed; returns the exit code of the sweep."""
    started = time.perf_counter()
    root = root or RUN_ROOT
    grid = parse_grid(grid_entries)
    if "seed" in grid:
        seeds = [int(s) for s in grid.pop("seed")]
    if not seeds:
        base = resolve_train_config(config_path, overrides, ablation).seed
        seeds = [base + i for i in range(DEFAULT_SEEDS)]
    keys = sorted(grid)
    cells = list(itertools.product(*(grid[k] for k in keys))) if keys else [()]
    jobs = [(cell, seed) for cell in cells for seed in seeds]
    failed_logger = get_failed_runs_logger(root)

    def child(job):
        cell, seed = job
        child_overrides = list(overrides) + list(zip(keys, cell)) + [("seed", str(seed))]
        try:
            run_dir, manifest = run_train(config_path, child_overrides, ablation, root)
            return cell, seed, str(run_dir), manifest.results.get("test_metric"), None
        except Exception as exc:  # child failures are recorded and the sweep continues
            code = exc.exit_code if isinstance(exc, DynoodError) else EXIT_INTERNAL_ERROR
            detail = exc.detail if isinstance(exc, DynoodError) else repr(exc)
            logger.error(f"Sweep cell {dict(zip(keys, cell))} seed {seed} failed: {detail}")
            failed_logger.error({
                "config": str(config_path),
                "cell": dict(zip(keys, cell)),
                "seed": seed,
                "exit_code": code,
                "error": detail,
            })
            return cell, seed, None, None, code

    with ThreadPoolExecutor(max_workers=max(1, workers or SWEEP_WORKERS)) as pool:
        outcomes = list(pool.map(child, jobs))

    rows = []
    for cell in cells:
        values = [metric for c, _, _, metric, code in outcomes if c == cell and code is None]
        row = dict(zip(keys, cell))
        row["mean"] = float(np.mean(values)) if values else float("nan")
        row["std"] = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        row["runs"] = len(values)
        row["failed"] = sum(1 for c, _, _, _, code in outcomes if c == cell and code is not None)
        rows.append(row)

    resolved = {"config": str(Path(config_path).resolve()), "grid": grid, "seeds": list(seeds),
                "overrides": [list(pair) for pair in overrides], "ablation": ablation}
    final_dir = run_dir_for("sweep", resolved, None, root)
    with staged_run(final_dir) as staging:
        artifacts = {"summary": str(staging / SUMMARY_NAME)}
        pd.DataFrame(rows, columns=keys + ["mean", "std", "runs", "failed"]).to_csv(artifacts["summary"], index=False)
        if len(keys) == 1 and all(_is_number(cell[0]) for cell in cells):
            xs = [float(cell[0]) for cell in cells]
            per_seed = [[m for c, _, _, m, code in outcomes if c == cell and code is None] or [float("nan")]
                        for cell in cells]
            artifacts["series"] = str(staging / SERIES_NAME)
            write_series(series(xs, per_seed), artifacts["series"])
        artifacts = relocate(artifacts, staging, final_dir)
        for index, (cell, seed, run_dir, _, _) in enumerate(outcomes):
            if run_dir:
                artifacts[f"child_{index}"] = run_dir
        failures = [code for *_, code in outcomes if code is not None]
        manifest = RunManifest(
            command="sweep",
            config_path=str(Path(config_path).resolve()),
            config=resolved,
            artifacts=artifacts,
            results={"cells": len(cells), "runs": len(jobs), "failed": len(failures)},
            version=__version__,
            wall_time=time.perf_counter() - started,
        )
        write_manifest(staging, manifest)
    exit_code = max(failures) if failures else 0
    return final_dir, manifest, exit_code


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def run_validate(dataset: str) -> List[Violation]:
    return validate(load(dataset))


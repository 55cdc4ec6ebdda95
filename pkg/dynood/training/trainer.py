"""Joint training of encoder, environment VAE, invariant masks and predictor."""
import logging
import time
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional

import numpy as np
import pandas as pd
import torch

from ..esvae.generation import sample_generated_library
from ..esvae.losses import esvae_loss, rotate_blocks
from ..esvae.pseudo_labels import cluster_pseudo_labels
from ..esvae.schemas import EnvNoise, PseudoLabelTask
from ..evaluation.negatives import sample_negative_pairs
from ..evaluation.ood import ood_split_links
from ..graph_core.graph import prefix, validate
from ..graph_core.schemas import DynamicGraph, LabelKind
from ..intervention.interventions import draw_replacements, risk_loss
from ..intervention.library import build_observed_library, plan_interventions, with_generated
from ..intervention.schemas import InterventionPlan, InterventionScope, Replacements, SampleLibrary
from ..invariance.masks import variant_mask
from ..shared.exceptions import ConfigurationError, ContractViolation, NumericalError
from ..st_encoder.encoding import graph_tensors
from .config import HISTORY_COLUMNS
from .inference import mean_metric, range_metrics
from .losses import task_loss, total_loss
from .models import DynoodModel
from .schemas import EpochRecord, OptimizerKind, TrainConfig, TrainResult
from .targets import TaskTargets, task_targets

logger = logging.getLogger(__name__)


class EpochDraws(NamedTuple):
    """Everything random or recomputed-but-not-trained within one epoch."""

    pseudo_labels: Optional[PseudoLabelTask]
    noise: EnvNoise
    time_permutation: torch.Tensor
    library: SampleLibrary
    plan: Optional[InterventionPlan]
    replacements: Optional[List[Replacements]]


class LossComponents(NamedTuple):
    task: torch.Tensor
    risk: torch.Tensor
    svae: torch.Tensor
    static: torch.Tensor
    dynamic: torch.Tensor
    esvae: torch.Tensor
    total: torch.Tensor


def compute_losses(
    model: DynoodModel,
    H: torch.Tensor,
    targets: TaskTargets,
    draws: EpochDraws,
    history_end: int,
) -> LossComponents:
    """Composite loss for one epoch given representations H and frozen draws.

    The gate buffer of ``model.mask`` must already be refreshed.
    """
    cfg = model.cfg
    H_hist = H[:, :history_end]
    zero = H.new_zeros(())
    if cfg.beta2 > 0:
        esvae = esvae_loss(
            H_hist, model.esvae, draws.pseudo_labels, noise=draws.noise,
            positive_H=H_hist[:, draws.time_permutation], negative_H=rotate_blocks(H_hist),
        )
    else:
        esvae = None

    pair = model.mask.pair()
    h_i, _, expanded = model.mask(H)
    l_task = task_loss(h_i, targets, model.predictor)

    l_risk = zero
    if cfg.beta1 > 0 and draws.plan is not None:
        variant = variant_mask(pair, cfg.cutoff)
        l_risk = risk_loss(
            lambda intervened: task_loss(intervened, targets, model.predictor),
            H, variant, draws.library, draws.plan, cfg.intervention_config(),
            replacements=draws.replacements, masks=expanded,
        ).value

    svae, static, dynamic, esvae_total = (
        (esvae.svae, esvae.static, esvae.dynamic, esvae.total) if esvae is not None else (zero,) * 4
    )
    total = total_loss(l_task, l_risk, esvae_total, cfg.beta1, cfg.beta2)
    return LossComponents(l_task, l_risk, svae, static, dynamic, esvae_total, total)


class Trainer:
    def __init__(self, g: DynamicGraph, cfg: TrainConfig, dtype: torch.dtype = torch.float32):
        violations = validate(g)
        if violations:
            raise ContractViolation(f"graph fails validation: {violations[0]}")
        if cfg.ood_rule:
            g, _ = ood_split_links(g, cfg.ood_rule)
        if cfg.task == LabelKind.NODE_CLASS and (g.labels is None or g.labels.kind != LabelKind.NODE_CLASS):
            raise ConfigurationError("node classification needs node class labels")
        self.g = g
        self.cfg = cfg
        self.history_end = cfg.history_end()
        if not 1 <= self.history_end <= g.num_timestamps:
            raise ConfigurationError(
                f"train_range {cfg.train_range[0]}-{cfg.train_range[1]} needs representations up to "
                f"t={self.history_end}, graph has {g.num_timestamps} snapshots"
            )
        last_target = g.num_timestamps + 1 if cfg.task == LabelKind.LINK_OCCURRENCE else g.num_timestamps
        if cfg.test_range[1] > last_target:
            raise ConfigurationError(f"test_range ends at {cfg.test_range[1]}, last target timestamp is {last_target}")
        if g.node_count < cfg.clusters:
            raise ConfigurationError(f"need at least clusters={cfg.clusters} nodes, graph has {g.node_count}")

        num_classes = g.labels.num_classes if cfg.task == LabelKind.NODE_CLASS else 0
        self.model = DynoodModel(cfg, g.feature_dim, num_classes).to(dtype)
        self.tensors = graph_tensors(g, dtype)
        self.history_graph = prefix(g, self.history_end)
        self.optimizer = self._make_optimizer()
        val_negatives = None
        if cfg.task == LabelKind.LINK_OCCURRENCE:
            val_negatives = sample_negative_pairs(g, cfg.val_range, cfg.seed, cfg.negative_ratio)
        self.val_targets = task_targets(
            g, cfg.task, cfg.val_range, np.random.default_rng([cfg.seed, 1]), cfg.negative_ratio, val_negatives
        )
        self.pseudo_labels: Optional[PseudoLabelTask] = None

    def _make_optimizer(self) -> torch.optim.Optimizer:
        if self.cfg.optimizer == OptimizerKind.SGD:
            return torch.optim.SGD(self.model.parameters(), lr=self.cfg.learning_rate)
        return torch.optim.Adam(self.model.parameters(), lr=self.cfg.learning_rate)

    def train_targets(self, epoch: int) -> TaskTargets:
        rng = np.random.default_rng([self.cfg.seed, 2, epoch])
        targets = task_targets(self.g, self.cfg.task, self.cfg.train_range, rng, self.cfg.negative_ratio)
        if len(targets) == 0:
            raise ConfigurationError("no labels in the training range")
        return targets

    def intervention_timestamps(self, targets: TaskTargets) -> List[int]:
        read = sorted({int(i) + 1 for i in targets.rep_index.tolist()})
        if self.cfg.intervention_scope == InterventionScope.LAST:
            return read[-1:]
        return read

    @torch.no_grad()
    def prepare_epoch(self, epoch: int, H: torch.Tensor, targets: TaskTargets) -> EpochDraws:
        """Refresh pseudo labels, gates and libraries, and draw this epoch's noise."""
        cfg = self.cfg
        H_hist = H.detach()[:, : self.history_end]
        generator = torch.Generator().manual_seed(cfg.seed * 100_003 + epoch)

        if cfg.sequential_esvae and cfg.beta2 > 0:
            self.pseudo_labels = cluster_pseudo_labels(
                self.history_graph, H_hist.cpu().numpy(), m=cfg.clusters, k=cfg.top_k,
                seed=cfg.seed, restarts=cfg.kmeans_restarts,
            )
        noise = EnvNoise.draw(1, cfg.static_dim, self.history_end, cfg.dynamic_dim,
                              generator=generator, dtype=H.dtype)
        permutation = torch.randperm(self.history_end, generator=generator)

        library = build_observed_library(H_hist, seed=cfg.seed)
        generated = sample_generated_library(self.model.esvae, self.history_end, cfg.generated_per_timestamp, generator)
        library = with_generated(library, generated)

        self.model.mask.refresh(H_hist)

        plan, replacements = None, None
        if cfg.beta1 > 0:
            plan = plan_interventions(
                self.g.node_count, self.intervention_timestamps(targets),
                cfg.intervention_ratio, cfg.rounds, generator,
            )
            stamps = torch.tensor([t for _, t in plan.targets], dtype=torch.long)
            intervention_cfg = cfg.intervention_config()
            replacements = [
                draw_replacements(library, stamps, intervention_cfg,
                                  torch.Generator().manual_seed(cfg.seed * 7919 + epoch * 101 + r))
                for r in range(plan.rounds)
            ]
        return EpochDraws(self.pseudo_labels, noise, permutation, library, plan, replacements)

    def validation_metric(self) -> float:
        self.model.eval()
        with torch.no_grad():
            H = self.model.encoder(self.tensors)
            h_i, _, _ = self.model.mask(H)
            return mean_metric(range_metrics(h_i, self.val_targets, self.model))

    def step(self, epoch: int) -> EpochRecord:
        started = time.perf_counter()
        self.model.train()
        targets = self.train_targets(epoch)
        try:
            H = self.model.encoder(self.tensors)
            draws = self.prepare_epoch(epoch, H, targets)
            losses = compute_losses(self.model, H, targets, draws, self.history_end)
        except NumericalError as exc:
            raise NumericalError(exc.detail, epoch=epoch) from exc
        if not torch.isfinite(losses.total):
            raise NumericalError("non-finite training loss", epoch=epoch,
                                 task=float(losses.task), risk=float(losses.risk), esvae=float(losses.esvae))
        self.optimizer.zero_grad()
        losses.total.backward()
        self.optimizer.step()
        self._last_library = draws.library

        val_metric = self.validation_metric()
        return EpochRecord(
            epoch=epoch,
            l_task=float(losses.task),
            l_risk=float(losses.risk),
            l_svae=float(losses.svae),
            l_s=float(losses.static),
            l_d=float(losses.dynamic),
            val_metric=val_metric,
            l_total=float(losses.total),
            wall_time=time.perf_counter() - started,
        )

    def fit(self) -> TrainResult:
        history: List[EpochRecord] = []
        best_state: Dict[str, torch.Tensor] = {}
        best_epoch, best_val, best_library = 0, -np.inf, None
        for epoch in range(1, self.cfg.epochs + 1):
            record = self.step(epoch)
            history.append(record)
            logger.info(
                f"Epoch {epoch}/{self.cfg.epochs}: task={record.l_task:.4f} risk={record.l_risk:.4f} "
                f"svae={record.l_svae:.4f} val={record.val_metric:.4f} ({record.wall_time:.2f}s)"
            )
            if record.val_metric > best_val:
                best_epoch, best_val = epoch, record.val_metric
                best_state = {k: v.detach().clone() for k, v in self.model.state_dict().items()}
                best_library = self._last_library
        self.model.load_state_dict(best_state)
        logger.info(f"Best validation metric {best_val:.4f} at epoch {best_epoch}")
        return TrainResult(model=self.model, history=history, best_epoch=best_epoch,
                           best_val=float(best_val), library=best_library,
                           pseudo_labels=self.pseudo_labels)


def train(g: DynamicGraph, cfg: TrainConfig, dtype: torch.dtype = torch.float32) -> TrainResult:
    return Trainer(g, cfg, dtype).fit()


def history_frame(history: List[EpochRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.model_dump() for record in history], columns=HISTORY_COLUMNS)


def write_history(history: List[EpochRecord], path: str | Path) -> None:
    history_frame(history).to_csv(path, index=False, float_format="%.8g")

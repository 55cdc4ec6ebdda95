import logging
from typing import Tuple

import torch
import torch.nn.functional as F
from torch import nn

from ..shared.exceptions import ContractViolation
from .schemas import EnvPosterior, ESVAEConfig, GaussianParams

logger = logging.getLogger(__name__)


def _split_gaussian(out: torch.Tensor) -> GaussianParams:
    mean, log_variance = out.chunk(2, dim=-1)
    return GaussianParams(mean, log_variance).clamped()


class SequentialPrior(nn.Module):
    """Recurrent prior p(e_d^t | e_d^{<t}) with a learned initial state."""

    def __init__(self, dynamic_dim: int):
        super().__init__()
        self.dynamic_dim = dynamic_dim
        self.cell = nn.LSTMCell(dynamic_dim, dynamic_dim)
        self.h0 = nn.Parameter(torch.zeros(dynamic_dim))
        self.c0 = nn.Parameter(torch.zeros(dynamic_dim))
        self.head = nn.Linear(dynamic_dim, 2 * dynamic_dim)
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def initial_state(self, batch: int) -> Tuple[torch.Tensor, torch.Tensor]:
        return self.h0.expand(batch, -1), self.c0.expand(batch, -1)

    def step(self, e_d: torch.Tensor, state: Tuple[torch.Tensor, torch.Tensor]):
        return self.cell(e_d, state)

    def emit(self, state: Tuple[torch.Tensor, torch.Tensor]) -> GaussianParams:
        return _split_gaussian(self.head(state[0]))

    def forward(self, prefix: torch.Tensor) -> GaussianParams:
        """Prior for the step after ``prefix`` ((t-1) x k_d, possibly empty)."""
        state = self.initial_state(1)
        for e in prefix:
            state = self.step(e.unsqueeze(0), state)
        params = self.emit(state)
        return GaussianParams(params.mean[0], params.log_variance[0])

    def chain(self, e_d: torch.Tensor) -> GaussianParams:
        """Priors for every step of a T x k_d sequence, conditioned on the observed ``e_d`` prefix."""
        state = self.initial_state(1)
        outputs = [self.emit(state)]
        for e in e_d[:-1]:
            state = self.step(e.unsqueeze(0), state)
            outputs.append(self.emit(state))
        return GaussianParams(
            torch.cat([o.mean for o in outputs], dim=0),
            torch.cat([o.log_variance for o in outputs], dim=0),
        )


class StaticEncoder(nn.Module):
    """q(e_s | H^{1:T}): mean over nodes, recurrent pooling over time."""

    def __init__(self, rep_dim: int, hidden: int, static_dim: int):
        super().__init__()
        self.rnn = nn.LSTM(rep_dim, hidden, batch_first=True)
        self.head = nn.Linear(hidden, 2 * static_dim)

    def forward(self, summaries: torch.Tensor) -> GaussianParams:
        _, (h_n, _) = self.rnn(summaries.unsqueeze(0))
        return _split_gaussian(self.head(h_n[-1, 0]))


class DynamicEncoder(nn.Module):
    """q(e_d^t | H^{<=t}) from a unidirectional recurrence over per-timestamp summaries."""

    def __init__(self, rep_dim: int, dynamic_dim: int, sequential: bool = True):
        super().__init__()
        self.sequential = sequential
        if sequential:
            self.cell = nn.LSTMCell(rep_dim, dynamic_dim)
        else:
            self.mlp = nn.Sequential(nn.Linear(rep_dim, dynamic_dim), nn.ReLU())
        self.head = nn.Linear(dynamic_dim, 2 * dynamic_dim)

    def forward(self, summaries: torch.Tensor) -> GaussianParams:
        if self.sequential:
            # stepwise so that row t never depends on later rows
            state = None
            steps = []
            for summary in summaries:
                state = self.cell(summary.unsqueeze(0), state)
                steps.append(self.head(state[0]))
            return _split_gaussian(torch.cat(steps, dim=0))
        return _split_gaussian(self.head(self.mlp(summaries)))


class EnvDecoder(nn.Module):
    """2-layer perceptron p(H^t | e_s, e_d^t) -> (mu_G, log sigma_G^2)."""

    def __init__(self, static_dim: int, dynamic_dim: int, hidden: int, rep_dim: int):
        super().__init__()
        self.fc1 = nn.Linear(static_dim + dynamic_dim, hidden)
        self.fc2 = nn.Linear(hidden, 2 * rep_dim)

    def forward(self, e_s: torch.Tensor, e_d: torch.Tensor) -> GaussianParams:
        if e_s.dim() < e_d.dim():
            e_s = e_s.expand(*e_d.shape[:-1], e_s.shape[-1])
        return _split_gaussian(self.fc2(F.relu(self.fc1(torch.cat([e_s, e_d], dim=-1)))))


class EnvironmentSVAE(nn.Module):
    def __init__(self, cfg: ESVAEConfig, rep_dim: int):
        super().__init__()
        self.cfg = cfg
        self.rep_dim = rep_dim
        with torch.random.fork_rng():
            torch.manual_seed(cfg.seed)
            self.static_encoder = StaticEncoder(rep_dim, cfg.static_hidden, cfg.static_dim)
            self.dynamic_encoder = DynamicEncoder(rep_dim, cfg.dynamic_dim, cfg.sequential)
            self.prior = SequentialPrior(cfg.dynamic_dim)
            self.decoder = EnvDecoder(cfg.static_dim, cfg.dynamic_dim, cfg.decoder_hidden, rep_dim)
            self.cluster_head = nn.Linear(cfg.dynamic_dim, cfg.clusters)

    @staticmethod
    def summarize(H: torch.Tensor) -> torch.Tensor:
        """Mean-pool N x T x d' over nodes -> T x d'."""
        return H.mean(dim=0)

    def encode_static(self, H: torch.Tensor) -> GaussianParams:
        return self.static_encoder(self.summarize(H))

    def encode_dynamic(self, H_prefix: torch.Tensor) -> GaussianParams:
        if H_prefix.shape[1] == 0:
            raise ContractViolation("dynamic posterior needs a non-empty prefix")
        return self.dynamic_encoder(self.summarize(H_prefix))

    def posterior(self, H: torch.Tensor) -> EnvPosterior:
        summaries = self.summarize(H)
        return EnvPosterior(self.static_encoder(summaries), self.dynamic_encoder(summaries))

    def prior_chain(self, e_d: torch.Tensor) -> GaussianParams:
        if not self.cfg.sequential:
            return GaussianParams.standard(e_d.shape, dtype=e_d.dtype)
        return self.prior.chain(e_d)

    def prior_dynamic(self, e_d_prefix: torch.Tensor) -> GaussianParams:
        if not self.cfg.sequential:
            return GaussianParams.standard((self.cfg.dynamic_dim,), dtype=e_d_prefix.dtype)
        return self.prior(e_d_prefix)

    def decode(self, e_s: torch.Tensor, e_d_t: torch.Tensor) -> GaussianParams:
        return self.decoder(e_s, e_d_t)

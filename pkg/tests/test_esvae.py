import math

import numpy as np
import pytest
import torch

from conftest import make_graph
from dynood.esvae.config import LOGVAR_MIN
from dynood.esvae.generation import sample_generated_library
from dynood.esvae.losses import (
    combine_esvae_loss,
    dynamic_regularization_loss,
    elbo_loss,
    esvae_loss,
    kl_diag_gaussian,
    reparameterize,
    rotate_blocks,
    shuffle_time,
    triplet_margin,
    triplet_static_loss,
)
from dynood.esvae.models import EnvironmentSVAE
from dynood.esvae.pseudo_labels import cluster_pseudo_labels, export_assignments, structural_entropy
from dynood.esvae.schemas import EnvNoise, ESVAEConfig, GaussianParams, PseudoLabelTask
from dynood.shared.exceptions import ConfigurationError, ContractViolation, DomainError


def make_model(rep_dim=4, **overrides):
    cfg = ESVAEConfig(static_dim=2, dynamic_dim=3, decoder_hidden=5, clusters=2, top_k=1, **overrides)
    return EnvironmentSVAE(cfg, rep_dim).double()


def sequence(n=5, t=4, d=4, seed=0):
    return torch.randn(n, t, d, dtype=torch.float64, generator=torch.Generator().manual_seed(seed))


def test_untrained_prior_is_standard_normal():
    model = make_model()
    for prefix in (torch.zeros(0, 3, dtype=torch.float64), torch.randn(2, 3, dtype=torch.float64)):
        params = model.prior_dynamic(prefix)
        assert torch.equal(params.mean, torch.zeros(3, dtype=torch.float64))
        assert torch.equal(params.log_variance, torch.zeros(3, dtype=torch.float64))


def test_prior_state_accumulates():
    model = make_model()
    with torch.no_grad():
        model.prior.head.weight.copy_(torch.randn(6, 3, dtype=torch.float64, generator=torch.Generator().manual_seed(1)))
    prefix = torch.randn(2, 3, dtype=torch.float64, generator=torch.Generator().manual_seed(2))
    assert torch.equal(model.prior_dynamic(prefix).mean, model.prior_dynamic(prefix.clone()).mean)
    assert not torch.allclose(model.prior_dynamic(prefix).mean, model.prior_dynamic(prefix[:1]).mean)


def test_static_encoder_pools_nodes_invariantly_and_time_in_order():
    model = make_model()
    H = sequence()
    out = model.encode_static(H)
    permuted = model.encode_static(H[torch.tensor([4, 2, 0, 1, 3])])
    assert torch.allclose(out.mean, permuted.mean)
    assert torch.equal(model.encode_static(H).mean, out.mean)
    assert not torch.allclose(model.encode_static(torch.flip(H, dims=[1])).mean, out.mean)


def test_dynamic_posterior_is_causal():
    model = make_model()
    H = sequence(t=4)
    full = model.encode_dynamic(H)
    for t in range(1, 4):
        assert torch.equal(model.encode_dynamic(H[:, :t]).mean, full.mean[:t])
        assert torch.equal(model.encode_dynamic(H[:, :t]).log_variance, full.log_variance[:t])
    with pytest.raises(ContractViolation):
        model.encode_dynamic(H[:, :0])


def test_reparameterize_examples():
    p = GaussianParams(torch.tensor([1.0, 1.0]), torch.tensor([0.0, 0.0]))
    assert torch.equal(reparameterize(p, torch.zeros(2)), p.mean)
    assert torch.allclose(reparameterize(p, torch.tensor([1.0, -1.0])), torch.tensor([2.0, 0.0]))
    tight = GaussianParams(torch.tensor([1.0, 1.0]), torch.tensor([-1e6, -1e6]))
    floor = math.exp(LOGVAR_MIN / 2)
    sample = reparameterize(tight, torch.tensor([1.0, -1.0]))
    assert torch.allclose(sample - tight.mean, torch.tensor([floor, -floor]))
    assert not torch.equal(sample, tight.mean)
    with pytest.raises(ContractViolation):
        reparameterize(p, torch.zeros(3))


def test_decoder_zero_weights_gives_bias_and_hand_network():
    model = make_model(rep_dim=3)
    decoder = model.decoder
    with torch.no_grad():
        decoder.fc2.weight.zero_()
        decoder.fc2.bias.copy_(torch.tensor([1.0, 2.0, 3.0, 0.0, 0.0, 0.0]))
    out = model.decode(torch.randn(2, dtype=torch.float64), torch.randn(3, dtype=torch.float64))
    assert torch.allclose(out.mean, torch.tensor([1.0, 2.0, 3.0], dtype=torch.float64))

    with torch.no_grad():
        decoder.fc1.weight.copy_(torch.eye(5, dtype=torch.float64))
        decoder.fc1.bias.zero_()
        decoder.fc2.weight.copy_(torch.ones(6, 5, dtype=torch.float64))
        decoder.fc2.bias.zero_()
    e_s = torch.tensor([1.0, -2.0], dtype=torch.float64)
    e_d = torch.tensor([0.5, 3.0, -1.0], dtype=torch.float64)
    # relu keeps 1, 0.5 and 3; each output row sums them
    assert torch.allclose(model.decode(e_s, e_d).mean, torch.full((3,), 4.5, dtype=torch.float64))


def test_kl_examples():
    standard = GaussianParams(torch.zeros(3), torch.zeros(3))
    assert torch.equal(kl_diag_gaussian(standard), torch.zeros(3))
    shifted = GaussianParams(torch.ones(3), torch.zeros(3))
    assert torch.allclose(kl_diag_gaussian(standard, shifted), torch.full((3,), 0.5))


@pytest.mark.parametrize("seed", range(5))
def test_closed_form_kl_matches_monte_carlo(seed):
    gen = torch.Generator().manual_seed(seed)
    q = GaussianParams(torch.randn(4, generator=gen, dtype=torch.float64),
                       0.5 * torch.randn(4, generator=gen, dtype=torch.float64))
    p = GaussianParams(q.mean + 1.0 + torch.rand(4, generator=gen, dtype=torch.float64),
                       0.5 * torch.randn(4, generator=gen, dtype=torch.float64))
    samples = q.mean + q.std * torch.randn(100_000, 4, generator=gen, dtype=torch.float64)

    def log_density(x, params):
        return -0.5 * (math.log(2 * math.pi) + params.log_variance
                       + (x - params.mean).pow(2) / params.log_variance.exp()).sum(dim=-1)

    estimate = (log_density(samples, q) - log_density(samples, p)).mean()
    closed = kl_diag_gaussian(q, p).sum()
    assert abs(float(estimate - closed)) / float(closed) < 0.01


def test_elbo_terms_are_non_negative_and_finite():
    model = make_model()
    H = sequence()
    noise = EnvNoise.draw(1, 2, 4, 3, generator=torch.Generator().manual_seed(0), dtype=torch.float64)
    terms = elbo_loss(H, model.posterior(H), model, noise)
    assert float(terms.kl_static) >= -1e-7
    assert float(terms.kl_dynamic) >= -1e-7
    assert torch.isfinite(terms.total)
    assert torch.allclose(terms.total, terms.reconstruction + terms.kl_static + terms.kl_dynamic)
    with pytest.raises(ContractViolation):
        elbo_loss(H[:, :2], model.posterior(H), model, noise)


def test_triplet_margin_examples():
    assert float(triplet_margin(torch.tensor(0.0), torch.tensor(1.0), 1.0)) == 0.0
    assert float(triplet_margin(torch.tensor(2.0), torch.tensor(1.0), 1.0)) == 2.0
    assert float(triplet_margin(torch.tensor(0.0), torch.tensor(5.0), 1.0)) == 0.0


def test_triplet_loss_on_sequences_is_non_negative():
    model = make_model()
    H = sequence()
    loss = triplet_static_loss(H, shuffle_time(H, torch.Generator().manual_seed(0)), rotate_blocks(H), 1.0, model)
    assert float(loss) >= 0.0


def test_structural_entropy_examples():
    pair = structural_entropy(make_graph(2, [[(0, 1)]]).snapshot(1))
    assert np.allclose(pair, [0.5, 0.5]) and math.isclose(pair.sum(), 1.0)
    cycle = structural_entropy(make_graph(4, [[(0, 1), (1, 2), (2, 3), (0, 3)]]).snapshot(1))
    assert np.allclose(cycle, 0.5) and math.isclose(cycle.sum(), 2.0)
    star = structural_entropy(make_graph(4, [[(0, 1), (0, 2), (0, 3)]]).snapshot(1))
    assert math.isclose(star[0], 0.5)
    assert math.isclose(star[1], -(1 / 6) * math.log2(1 / 6))
    assert math.isclose(star.sum(), 1.7925, abs_tol=1e-4)
    isolated = structural_entropy(make_graph(3, [[(0, 1)]]).snapshot(1))
    assert isolated[2] == 0.0
    with pytest.raises(DomainError):
        structural_entropy(make_graph(3, [[]]).snapshot(1))


def test_singleton_clusters_carry_node_entropy():
    g = make_graph(4, [[(0, 1), (0, 2), (0, 3)]])
    H = np.array([0.0, 10.0, 20.0, 30.0]).reshape(4, 1, 1)
    task = cluster_pseudo_labels(g, H, m=4, k=2, seed=0, restarts=3)
    summands = structural_entropy(g.snapshot(1))
    for v in range(4):
        assert math.isclose(task.cluster_uncertainty[0, task.cluster_assignment[v]], summands[v])


def test_equal_degrees_break_ties_to_lowest_clusters():
    g = make_graph(6, [[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]])
    H = np.arange(6, dtype=np.float64).reshape(6, 1, 1) * 10
    task = cluster_pseudo_labels(g, H, m=3, k=2, seed=0, restarts=3)
    assert task.targets == ((0, 1),)
    assert all(len(chosen) == 2 for chosen in task.targets)


def test_two_community_pseudo_labels_match_brute_force():
    dense = [(u, v) for u in range(10) for v in range(u + 1, 10)]
    sparse = [(u, u + 1) for u in range(10, 19)]
    g = make_graph(20, [dense + sparse + [(0, 10)]])
    H = np.zeros((20, 1, 2))
    H[:10, 0, 0], H[10:, 0, 1] = 1.0, 1.0
    task = cluster_pseudo_labels(g, H, m=2, k=1, seed=0, restarts=5)

    degrees = [sum(1 for u, v in dense + sparse + [(0, 10)] if node in (u, v)) for node in range(20)]
    vol = sum(degrees)
    per_node = [-(d / vol) * math.log2(d / vol) if d else 0.0 for d in degrees]
    means = []
    for cluster in range(2):
        members = [v for v in range(20) if task.cluster_assignment[v] == cluster]
        means.append(sum(per_node[v] for v in members) / len(members))
    expected = max(range(2), key=lambda c: (means[c], -c))
    assert task.targets == ((expected,),)
    assert task.cluster_assignment[0] == expected
    assert np.allclose(task.cluster_uncertainty[0], means)


def test_too_few_nodes_for_clusters():
    g = make_graph(3, [[(0, 1)]])
    with pytest.raises(ConfigurationError):
        cluster_pseudo_labels(g, np.zeros((3, 1, 2)), m=4, k=1)


def test_export_assignments_is_one_based(tmp_path):
    task = PseudoLabelTask(cluster_assignment=np.array([0, 1, 1]), targets=((1,),),
                           cluster_uncertainty=np.zeros((1, 2)), clusters=2, top_k=1)
    export_assignments(task, tmp_path / "a.txt")
    assert (tmp_path / "a.txt").read_text().splitlines() == ["v cluster", "0 1", "1 2", "2 2"]


def test_dynamic_regularisation_examples():
    model = make_model()
    task = PseudoLabelTask(cluster_assignment=np.zeros(2, dtype=int), targets=((0,), (1,)),
                           cluster_uncertainty=np.zeros((2, 2)), clusters=2, top_k=1)
    with torch.no_grad():
        model.cluster_head.weight.zero_()
        model.cluster_head.bias.zero_()
    e_d = torch.randn(2, 3, dtype=torch.float64)
    # uniform 0.5 probabilities give ln 2 per timestamp
    assert math.isclose(float(dynamic_regularization_loss(e_d, task, model)), 2 * math.log(2), rel_tol=1e-9)
    with torch.no_grad():
        model.cluster_head.bias.copy_(torch.tensor([50.0, -50.0]))
    near_exact = dynamic_regularization_loss(e_d[:1], task.model_copy(update={"targets": ((0,),)}), model)
    assert 0.0 <= float(near_exact) < 1e-10


def test_combined_loss_examples():
    one, two, three = torch.tensor(1.0), torch.tensor(2.0), torch.tensor(3.0)
    assert float(combine_esvae_loss(one, two, three, 0.0, 0.0).total) == 1.0
    assert math.isclose(float(combine_esvae_loss(one, two, three, 0.5, 0.1).total), 2.3, rel_tol=1e-6)
    assert float(combine_esvae_loss(one, three, three, 0.5, 0.1).total) >= float(
        combine_esvae_loss(one, two, three, 0.5, 0.1).total)
    with pytest.raises(ContractViolation):
        combine_esvae_loss(one, two, three, -1.0, 0.0)


def test_non_sequential_variant_drops_regularisers():
    model = make_model(sequential=False)
    loss = esvae_loss(sequence(), model, None, generator=torch.Generator().manual_seed(0))
    assert float(loss.static) == 0.0 and float(loss.dynamic) == 0.0
    assert torch.equal(loss.total, loss.svae)


def test_generated_library_examples():
    model = make_model()
    empty = sample_generated_library(model, 3, 0)
    assert empty.vectors.shape == (0, 4)
    first = sample_generated_library(model, 3, 5, torch.Generator().manual_seed(7))
    second = sample_generated_library(model, 3, 5, torch.Generator().manual_seed(7))
    assert torch.equal(first.vectors, second.vectors)
    assert first.timestamps.tolist() == [1] * 5 + [2] * 5 + [3] * 5


def test_generated_samples_concentrate_on_decoded_constant():
    model = make_model()
    constant = torch.tensor([0.5, -1.0, 2.0, 0.0], dtype=torch.float64)
    with torch.no_grad():
        model.decoder.fc2.weight.zero_()
        model.decoder.fc2.bias.copy_(torch.cat([constant, torch.full((4,), -2.0, dtype=torch.float64)]))
    samples = sample_generated_library(model, 1, 1000, torch.Generator().manual_seed(0)).vectors
    sigma = math.exp(-1.0)
    assert torch.all((samples.mean(dim=0) - constant).abs() <= 3 * sigma / math.sqrt(1000))

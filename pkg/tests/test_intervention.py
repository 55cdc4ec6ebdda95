import pandas as pd
import pytest
import torch

from dynood.esvae.generation import GeneratedSamples
from dynood.intervention.interventions import (
    draw_replacements,
    export_trace,
    intervene,
    intervene_masked,
    intervene_targets,
    risk_loss,
)
from dynood.intervention.library import build_observed_library, plan_interventions, with_generated
from dynood.intervention.schemas import InterventionConfig, InterventionPlan, Replacements, SampleSource
from dynood.invariance.masks import masks_from_gate
from dynood.shared.exceptions import ConfigurationError, ContractViolation


def library_for(n=3, t=4, d=5, seed=0, generated=0):
    H = torch.randn(n, t, d, generator=torch.Generator().manual_seed(seed), dtype=torch.float64)
    library = build_observed_library(H)
    if generated:
        vectors = torch.full((generated * t, d), 100.0, dtype=torch.float64)
        stamps = torch.arange(1, t + 1).repeat_interleave(generated)
        library = with_generated(library, GeneratedSamples(vectors, stamps))
    return H, library


def test_observed_library_examples():
    single = build_observed_library(torch.ones(1, 1, 2))
    assert single.size == 1
    H, library = library_for(3, 4)
    assert library.size == 12
    for v in range(3):
        for t in range(1, 5):
            row = v * 4 + t - 1
            assert torch.equal(library.observed[row], H[v, t - 1])
            assert int(library.observed_timestamps[row]) == t and int(library.observed_nodes[row]) == v


def test_library_rejects_non_finite_vectors():
    with pytest.raises(ValueError):
        build_observed_library(torch.tensor([[[float("nan"), 0.0]]]))


def test_intervene_examples():
    h = torch.tensor([1.0, 2.0, 3.0])
    s = torch.tensor([9.0, 9.0, 9.0])
    assert torch.equal(intervene(h, [], s), h)
    assert torch.equal(intervene(h, [0, 1, 2], s), s)
    assert torch.equal(intervene(h, [1], s), torch.tensor([1.0, 9.0, 3.0]))
    assert torch.equal(h, torch.tensor([1.0, 2.0, 3.0]))
    with pytest.raises(ContractViolation):
        intervene(h, [3], s)
    with pytest.raises(ContractViolation):
        intervene(h, [0], torch.zeros(2))


@pytest.mark.parametrize("seed", range(100))
def test_intervene_never_touches_invariant_coordinates(seed):
    gen = torch.Generator().manual_seed(seed)
    h, s = torch.randn(8, generator=gen), torch.randn(8, generator=gen)
    P_V = torch.rand(8, generator=gen) < 0.5
    out = intervene(h, P_V, s)
    assert torch.equal(out[~P_V], h[~P_V])
    assert torch.equal(out[P_V], s[P_V])


def test_plan_picks_ratio_of_nodes():
    plan = plan_interventions(10, [3], 0.3, 4, torch.Generator().manual_seed(0))
    assert len(plan.targets) == 3 and all(t == 3 for _, t in plan.targets)
    full = plan_interventions(4, [1, 2], 1.0, 2)
    assert full.targets == ((0, 1), (1, 1), (2, 1), (3, 1), (0, 2), (1, 2), (2, 2), (3, 2))
    assert len(plan_interventions(10, [1], 0.01, 2).targets) == 1


def test_plan_needs_two_rounds():
    with pytest.raises(ValueError):
        InterventionPlan(targets=((0, 1),), rounds=1)


def test_generated_fraction_zero_draws_only_observed():
    _, library = library_for(generated=3)
    cfg = InterventionConfig(generated_fraction=0.0)
    drawn = draw_replacements(library, torch.tensor([1, 2, 3, 4] * 5), cfg, torch.Generator().manual_seed(0))
    assert set(drawn.sources) == {SampleSource.OBSERVED}
    assert torch.all(drawn.vectors.abs() < 100)


def test_generated_fraction_one_draws_only_generated():
    _, library = library_for(generated=3)
    cfg = InterventionConfig(generated_fraction=1.0, match_timestamp=True)
    drawn = draw_replacements(library, torch.tensor([2, 4]), cfg, torch.Generator().manual_seed(0))
    assert set(drawn.sources) == {SampleSource.GENERATED}
    assert all(int(library.generated_timestamps[i]) == t for i, t in zip(drawn.sample_ids.tolist(), [2, 4]))


def test_empty_library_is_a_configuration_error():
    H = torch.zeros(2, 1, 3)
    library = build_observed_library(H).model_copy(update={"observed": torch.zeros(0, 3)})
    plan = InterventionPlan(targets=((0, 1),), rounds=2)
    with pytest.raises(ConfigurationError):
        risk_loss(lambda x: x.sum(), H, torch.ones(2, 3, dtype=torch.bool), library, plan, InterventionConfig())


def test_risk_is_population_variance_of_round_losses():
    H, library = library_for()
    plan = InterventionPlan(targets=((0, 4),), rounds=2)
    values = iter([torch.tensor(1.0), torch.tensor(3.0)])
    result = risk_loss(lambda _: next(values), H, torch.ones(3, 5, dtype=torch.bool), library, plan,
                       InterventionConfig(rounds=2))
    assert float(result.value) == pytest.approx(1.0)
    assert result.round_losses.tolist() == [1.0, 3.0]


def test_identical_replacements_give_zero_risk():
    H = torch.randn(2, 2, 3, dtype=torch.float64)
    library = build_observed_library(torch.ones(1, 1, 3, dtype=torch.float64))
    plan = InterventionPlan(targets=((0, 2), (1, 2)), rounds=4)
    result = risk_loss(lambda x: x.pow(2).sum(), H, torch.ones(2, 3, dtype=torch.bool), library, plan,
                       InterventionConfig(generated_fraction=0.0))
    assert float(result.value) == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_no_variant_dimensions_give_zero_risk(seed):
    H, library = library_for(seed=seed, generated=2)
    plan = plan_interventions(3, [4], 1.0, 4)
    no_variant = torch.zeros(3, 5, dtype=torch.bool)
    result = risk_loss(lambda x: (x * x).mean(), H, no_variant, library, plan, InterventionConfig(), seed=seed)
    assert float(result.value) == 0.0
    assert torch.allclose(result.round_losses, (H * H).mean().expand(4))


def test_risk_is_deterministic_and_non_negative():
    H, library = library_for(generated=2)
    plan = plan_interventions(3, [3, 4], 1.0, 4)
    variant = torch.rand(3, 5, generator=torch.Generator().manual_seed(1)) < 0.5
    first = risk_loss(lambda x: x.sum().sin(), H, variant, library, plan, InterventionConfig(), seed=11)
    second = risk_loss(lambda x: x.sum().sin(), H, variant, library, plan, InterventionConfig(), seed=11)
    assert torch.equal(first.value, second.value)
    assert float(first.value) >= 0.0


def test_intervened_targets_keep_gradient_to_untouched_coordinates():
    H = torch.randn(2, 2, 3, dtype=torch.float64, requires_grad=True)
    _, library = library_for(n=2, t=2, d=3)
    plan = InterventionPlan(targets=((0, 2),), rounds=2)
    variant = torch.tensor([[True, False, False], [True, False, False]])
    drawn = draw_replacements(library, torch.tensor([2]), InterventionConfig(), torch.Generator().manual_seed(0))
    intervene_targets(H, variant, plan, drawn).sum().backward()
    assert H.grad[0, 1, 0] == 0.0
    assert torch.all(H.grad[0, 1, 1:] == 1.0) and torch.all(H.grad[1] == 1.0)


def test_trace_export(tmp_path):
    H, library = library_for()
    plan = InterventionPlan(targets=((0, 4), (1, 4)), rounds=3)
    result = risk_loss(lambda x: x.mean(), H, torch.ones(3, 5, dtype=torch.bool), library, plan,
                       InterventionConfig(rounds=3))
    export_trace(result.trace, tmp_path / "trace.csv")
    frame = pd.read_csv(tmp_path / "trace.csv")
    assert list(frame.columns) == ["round", "node", "timestamp", "source", "sample_id", "loss"]
    assert len(frame) == 6
    assert set(frame["source"]) <= {"observed", "generated"}


def masked_pair(gate, W_I):
    return masks_from_gate(torch.tensor(gate, dtype=torch.float64).unsqueeze(1), torch.tensor(W_I, dtype=torch.float64))


def test_intervene_masked_mixes_replacement_into_variant_part():
    H = torch.arange(12, dtype=torch.float64).reshape(2, 2, 3)
    pair = masked_pair([[1.0, 0.0, 1.0], [1.0, 1.0, 1.0]], [2.0, 0.0, -1.0])
    variant = torch.tensor([[False, True, True], [False, False, True]])
    plan = InterventionPlan(targets=((0, 2),), rounds=2)
    drawn = Replacements(torch.full((1, 3), 9.0, dtype=torch.float64), [SampleSource.OBSERVED], torch.tensor([0]))

    out = intervene_masked(H, pair, variant, plan, drawn)
    invariant = pair.invariant * H
    assert torch.equal(out[1], invariant[1])
    assert torch.equal(out[0, 0], invariant[0, 0])
    assert out[0, 1, 0] == invariant[0, 1, 0]
    # closed gate: M_I = 0, so the coordinate is the replacement itself
    assert out[0, 1, 1] == 9.0
    m_i = torch.sigmoid(torch.tensor(-1.0, dtype=torch.float64))
    assert out[0, 1, 2] == pytest.approx(float(m_i * H[0, 1, 2] + (1 - m_i) * 9.0))


def test_masked_rounds_without_variant_dimensions_score_the_invariant_part():
    H, library = library_for(generated=2)
    pair = masked_pair([[1.0] * 5] * 3, [0.5] * 5)
    plan = plan_interventions(3, [4], 1.0, 3)
    result = risk_loss(lambda x: (x * x).mean(), H, torch.zeros(3, 5, dtype=torch.bool), library, plan,
                       InterventionConfig(rounds=3), masks=pair)
    assert float(result.value) == 0.0
    assert torch.allclose(result.round_losses, (pair.invariant * H).pow(2).mean().expand(3))


def test_masked_rounds_see_closed_gate_replacements():
    H, library = library_for(generated=2)
    pair = masked_pair([[0.0] * 5] * 3, [1.0] * 5)
    variant = ~(pair.invariant.squeeze(1) > 0.5)
    plan = plan_interventions(3, [4], 1.0, 4)
    result = risk_loss(lambda x: x.pow(2).sum(), H, variant, library, plan, InterventionConfig(), seed=2,
                       masks=pair)
    assert float(result.value) > 0.0

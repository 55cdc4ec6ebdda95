import numpy as np
import pytest
import torch

from dynood.invariance.masks import (
    InvariantMask,
    as_index_mask,
    export_mask_text,
    init_invariant_gate,
    masks,
    masks_from_gate,
    pattern_indices,
    split,
    variant_mask,
)
from dynood.invariance.schemas import InvarianceConfig
from dynood.shared.exceptions import ContractViolation


def logit(p):
    return torch.log(torch.tensor(p, dtype=torch.float64) / (1 - torch.tensor(p, dtype=torch.float64)))


def test_gate_examples():
    assert torch.equal(init_invariant_gate(torch.ones(4, 3), 0.1), torch.ones(3))
    assert torch.equal(init_invariant_gate(torch.randn(1, 3), 0.0), torch.ones(3))
    history = torch.tensor([[0.0, 0.0], [2.0, 0.0]])
    assert torch.equal(init_invariant_gate(history, 0.5), torch.tensor([0.0, 1.0]))
    with pytest.raises(ContractViolation):
        init_invariant_gate(torch.zeros(0, 3), 0.1)


def test_mask_examples():
    W = torch.zeros(2)
    closed = masks_from_gate(torch.zeros(2), W)
    assert torch.equal(closed.invariant, torch.zeros(2)) and torch.equal(closed.variant, torch.ones(2))
    saturated = masks_from_gate(torch.ones(2), torch.full((2,), 40.0))
    assert torch.allclose(saturated.invariant, torch.ones(2)) and torch.allclose(saturated.variant, torch.zeros(2))
    pair = masks_from_gate(torch.tensor([1.0, 0.0], dtype=torch.float64), torch.stack([logit(0.8), logit(0.9)]))
    assert torch.allclose(pair.invariant, torch.tensor([0.8, 0.0], dtype=torch.float64))
    assert torch.allclose(pair.variant, torch.tensor([0.2, 1.0], dtype=torch.float64))


def test_split_examples():
    h = torch.tensor([2.0, 4.0])
    ones = masks_from_gate(torch.ones(2), torch.full((2,), 60.0))
    h_i, h_v = split(h, ones)
    assert torch.allclose(h_i, h) and torch.allclose(h_v, torch.zeros(2))
    zeros = masks_from_gate(torch.zeros(2), torch.zeros(2))
    assert torch.equal(split(h, zeros)[1], h)
    half = masks_from_gate(torch.tensor([1.0, 0.0]), torch.zeros(2))
    h_i, h_v = split(h, half)
    assert torch.allclose(h_i, torch.tensor([1.0, 0.0])) and torch.allclose(h_v, torch.tensor([1.0, 4.0]))
    with pytest.raises(ContractViolation):
        split(torch.zeros(3), half)


def test_pattern_indices_examples():
    everything = masks_from_gate(torch.ones(3), torch.full((3,), 60.0))
    assert pattern_indices(everything, 0.5) == ([0, 1, 2], [])
    pair = masks_from_gate(torch.ones(2, dtype=torch.float64), torch.stack([logit(0.9), logit(0.1)]))
    assert pattern_indices(pair, 0.5) == ([0], [1])
    with pytest.raises(ContractViolation):
        pattern_indices(masks_from_gate(torch.ones(2, 3), torch.zeros(3)), 0.5)


@pytest.mark.parametrize("seed", range(100))
def test_mask_laws_on_random_inputs(seed):
    gen = torch.Generator().manual_seed(seed)
    history = torch.randn(5, 6, generator=gen, dtype=torch.float64)
    W = torch.randn(6, generator=gen, dtype=torch.float64)
    delta = float(torch.rand(1, generator=gen))
    pair = masks(history, delta, W)
    assert torch.equal(pair.variant, 1.0 - pair.invariant)
    assert torch.allclose(pair.invariant + pair.variant, torch.ones(6, dtype=torch.float64), rtol=0, atol=1e-15)
    h = torch.randn(6, generator=gen, dtype=torch.float64)
    h_i, h_v = split(h, pair)
    assert torch.allclose(h_i + h_v, h, atol=1e-7)
    p_i, p_v = pattern_indices(pair, 0.5)
    assert set(p_i).isdisjoint(p_v) and sorted(p_i + p_v) == list(range(6))
    assert torch.all(init_invariant_gate(history, delta + 0.5) >= pair.gate)


def test_gradient_reaches_weights_but_not_the_gate():
    history = torch.randn(4, 3, dtype=torch.float64, requires_grad=True)
    W = torch.randn(3, dtype=torch.float64, requires_grad=True)
    masks(history, 10.0, W).invariant.sum().backward()
    assert history.grad is None
    assert W.grad is not None and torch.all(W.grad > 0)

    gate = init_invariant_gate(history, 0.5)
    h = torch.randn(3, dtype=torch.float64)
    assert torch.autograd.gradcheck(
        lambda weights: split(h, masks_from_gate(gate, weights))[0].sum(),
        (W.detach().clone().requires_grad_(True),), eps=1e-4, rtol=1e-3,
    )


def test_variant_mask_is_complement_of_patterns():
    pair = masks_from_gate(torch.ones(3, dtype=torch.float64), torch.stack([logit(0.9), logit(0.2), logit(0.6)]))
    assert variant_mask(pair, 0.5).tolist() == [False, True, False]


def test_module_refresh_and_forward():
    H = torch.randn(4, 3, 5, generator=torch.Generator().manual_seed(0))
    module = InvariantMask(5, InvarianceConfig(delta=0.5))
    with pytest.raises(ContractViolation):
        module.pair()
    gate = module.refresh(H)
    assert gate.shape == (4, 5)
    assert set(gate.unique().tolist()) <= {0.0, 1.0}
    h_i, h_v, pair = module(H)
    assert h_i.shape == H.shape and torch.allclose(h_i + h_v, H, atol=1e-6)
    assert pair.invariant.shape == (4, 1, 5)


def test_disabled_gate_leaves_weights_only():
    H = torch.randn(4, 3, 5)
    module = InvariantMask(5, InvarianceConfig(use_gate=False))
    module.refresh(H)
    assert torch.equal(module.gate, torch.ones(4, 5))
    assert torch.allclose(module.pair().invariant, torch.sigmoid(module.W_I).expand(4, 5))


def test_per_timestamp_gates_use_growing_prefixes():
    H = torch.randn(3, 4, 6, generator=torch.Generator().manual_seed(1))
    module = InvariantMask(6, InvarianceConfig(per_timestamp_gates=True, delta=0.3))
    gate = module.refresh(H)
    assert gate.shape == (3, 4, 6)
    assert torch.equal(gate[:, 0], torch.ones(3, 6))
    longer = torch.randn(3, 6, 6)
    expanded = module.expand(module.pair(), longer)
    assert torch.equal(expanded.gate[:, 5], gate[:, 3])


def test_export_mask_text(tmp_path):
    values = torch.tensor([[0.25, 1.0], [0.0, 0.5]])
    export_mask_text(values, tmp_path / "mask.txt")
    assert np.allclose(np.loadtxt(tmp_path / "mask.txt"), values.numpy())


def test_as_index_mask():
    assert as_index_mask([0, 2], 3).tolist() == [True, False, True]
    with pytest.raises(ContractViolation):
        as_index_mask([3], 3)

from .masks import (
    InvariantMask,
    export_mask_text,
    init_invariant_gate,
    masks,
    pattern_indices,
    split,
    variant_mask,
)
from .schemas import InvarianceConfig, MaskPair

__all__ = [
    "InvarianceConfig",
    "InvariantMask",
    "MaskPair",
    "export_mask_text",
    "init_invariant_gate",
    "masks",
    "pattern_indices",
    "split",
    "variant_mask",
]

from .env_suite import gen_env_suite
from .feature_shift import gen_feature_shift
from .generate import generate, parse_spec, write_dataset
from .sbm import expected_block_density, gen_sbm_node_cls
from .schemas import EnvMode, EnvSuiteSpec, FeatureShiftSpec, GeneratedDataset, GeneratorKind, SbmSpec

__all__ = [
    "EnvMode",
    "EnvSuiteSpec",
    "FeatureShiftSpec",
    "GeneratedDataset",
    "GeneratorKind",
    "SbmSpec",
    "expected_block_density",
    "gen_env_suite",
    "gen_feature_shift",
    "gen_sbm_node_cls",
    "generate",
    "parse_spec",
    "write_dataset",
]

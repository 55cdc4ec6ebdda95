"""Spec-file dispatch and dataset persistence for every generator."""
import logging
from pathlib import Path
from typing import Dict, Union

from ..graph_core.storage import provenance_path, save, save_splits, splits_path
from ..shared.exceptions import ConfigurationError
from ..shared.kv_config import build_model
from .env_suite import gen_env_suite
from .feature_shift import gen_feature_shift
from .sbm import gen_sbm_node_cls
from .schemas import EnvSuiteSpec, FeatureShiftSpec, GeneratedDataset, GeneratorKind, SbmSpec

logger = logging.getLogger(__name__)

AnySpec = Union[SbmSpec, FeatureShiftSpec, EnvSuiteSpec]

SPEC_MODELS = {
    GeneratorKind.SBM: SbmSpec,
    GeneratorKind.FEATURE_SHIFT: FeatureShiftSpec,
    GeneratorKind.ENV_SUITE: EnvSuiteSpec,
}


def parse_spec(raw: Dict[str, str]) -> AnySpec:
    if "generator" not in raw:
        raise ConfigurationError("missing required key 'generator'")
    try:
        kind = GeneratorKind(raw["generator"])
    except ValueError:
        choices = ", ".join(k.value for k in GeneratorKind)
        raise ConfigurationError(f"unknown generator {raw['generator']!r} (expected one of {choices})")
    return build_model(SPEC_MODELS[kind], raw)


def generate(spec: AnySpec) -> GeneratedDataset:
    if isinstance(spec, SbmSpec):
        return gen_sbm_node_cls(spec)
    if isinstance(spec, FeatureShiftSpec):
        return gen_feature_shift(spec)
    return gen_env_suite(spec)


def write_dataset(dataset: GeneratedDataset, path: str | Path) -> Dict[str, str]:
    """Write the EVG1 file with its provenance and split sidecars; returns the artifact paths."""
    path = Path(path)
    save(dataset.graph, path)
    save_splits(dataset.splits, splits_path(path))
    artifacts = {"dataset": str(path), "splits": str(splits_path(path))}
    provenance = provenance_path(path)
    if provenance.is_file():
        artifacts["provenance"] = str(provenance)
    return artifacts

from .encoding import encode, graph_tensors, project_features, spatial_attention_layer, temporal_aggregate
from .models import SpatioTemporalEncoder, relative_time_encoding
from .schemas import Activation, EncoderConfig, NodeRepresentationSequence

__all__ = [
    "Activation",
    "EncoderConfig",
    "NodeRepresentationSequence",
    "SpatioTemporalEncoder",
    "encode",
    "graph_tensors",
    "project_features",
    "relative_time_encoding",
    "spatial_attention_layer",
    "temporal_aggregate",
]

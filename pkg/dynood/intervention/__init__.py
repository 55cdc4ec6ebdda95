from .interventions import (
    draw_replacements,
    export_trace,
    intervene,
    intervene_masked,
    intervene_targets,
    risk_loss,
)
from .library import build_observed_library, plan_interventions, with_generated
from .schemas import (
    InterventionConfig,
    InterventionPlan,
    InterventionScope,
    RiskResult,
    SampleLibrary,
    SampleSource,
)

__all__ = [
    "InterventionConfig",
    "InterventionPlan",
    "InterventionScope",
    "RiskResult",
    "SampleLibrary",
    "SampleSource",
    "build_observed_library",
    "draw_replacements",
    "export_trace",
    "intervene",
    "intervene_masked",
    "intervene_targets",
    "plan_interventions",
    "risk_loss",
    "with_generated",
]

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field


class RunManifest(BaseModel):
    """Exactly one per run directory; ``config`` is the resolved, self-contained merge."""

    command: str
    config_path: Optional[str] = None
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    variant: Optional[str] = None
    artifacts: Dict[str, str] = Field(default_factory=dict)
    results: Dict[str, Any] = Field(default_factory=dict)
    version: str
    wall_time: float = 0.0

"""
End-to-end pipeline run record.

Status moves pending -> running -> completed | failed, and the run record is
written next to the artifacts so a failed run still leaves a diagnosis.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class PipelineStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class PipelineStage(str, Enum):
    SYNTH = "synth"
    TOKENIZE = "tokenize"
    RENDER = "render"
    PLAN = "plan"
    GAE = "gae"


class PipelineRun(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "status": "completed",
                "stages": ["synth", "tokenize", "render", "plan", "gae"],
                "frame_count": 163,
                "window_count": 2,
                "gae": 0.0,
            }
        },
    )

    status: PipelineStatus = PipelineStatus.PENDING
    stages: List[PipelineStage] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)  # relative to the output directory
    frame_count: int = 0
    window_count: int = 0
    gae: Optional[float] = None
    error_code: Optional[str] = None
    error_message: Optional[str] = None

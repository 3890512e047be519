"""
Dynamic window planning types: anchor visibility and the window plan.
"""

from typing import List

from pydantic import BaseModel, ConfigDict, Field


class VisibilitySeries(BaseModel):
    """
    V_t = |A_t| / |A_0| for t = 0..N relative to the conditioning frame.
    Index 0 is the conditioning frame itself, so ratios[0] == 1.
    """

    model_config = ConfigDict(frozen=True)

    ratios: List[float]
    anchor_count_0: int = Field(ge=1)

    def __len__(self) -> int:
        return len(self.ratios)


class Window(BaseModel):
    """One generation window [start, end] and the frame the next window starts from."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"start": 0, "key": 81, "end": 81, "min_visibility": 0.74, "violated": False}
        },
    )

    start: int = Field(ge=0)
    key: int
    end: int
    min_visibility: float
    violated: bool


class WindowPlan(BaseModel):
    """Chained windows covering frames 0..horizon."""

    model_config = ConfigDict(frozen=True)

    windows: List[Window] = Field(default_factory=list)
    window_length: int = Field(ge=1)
    threshold: float
    horizon: int = Field(ge=0)
    dynamic: bool = True

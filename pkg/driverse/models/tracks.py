"""
Latent motion alignment types: point tracks, latent sequences and weights.
"""

from typing import List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

TrackId = Union[int, str]


class TrackSet(BaseModel):
    """
    N pixel tracks over frames 0..T with per-entry validity flags.
    Invalid entries are flagged, their coordinates stay finite.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    xy: np.ndarray  # (N, T+1, 2) pixels
    valid: np.ndarray  # (N, T+1) bool
    ids: List[TrackId]
    source: str = ""

    @model_validator(mode="after")
    def shapes_agree(self) -> "TrackSet":
        if self.xy.ndim != 3 or self.xy.shape[2] != 2:
            raise ValueError(f"track coordinates must have shape (N, T+1, 2), got {self.xy.shape}")
        if self.valid.shape != self.xy.shape[:2]:
            raise ValueError(f"validity shape {self.valid.shape} does not match tracks {self.xy.shape[:2]}")
        if len(self.ids) != self.xy.shape[0]:
            raise ValueError(f"{len(self.ids)} ids for {self.xy.shape[0]} tracks")
        if not np.all(np.isfinite(self.xy)):
            raise ValueError("track coordinates must be finite; flag invalid entries instead")
        return self

    @classmethod
    def from_arrays(cls, xy: np.ndarray, valid: np.ndarray | None = None, ids=None, source: str = "") -> "TrackSet":
        xy = np.asarray(xy, dtype=float)
        valid = np.ones(xy.shape[:2], dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
        ids = list(range(xy.shape[0])) if ids is None else list(ids)
        return cls(xy=xy, valid=valid, ids=ids, source=source)

    @property
    def num_tracks(self) -> int:
        return int(self.xy.shape[0])

    @property
    def num_frames(self) -> int:
        return int(self.xy.shape[1])

    def subset(self, indices) -> "TrackSet":
        idx = np.asarray(indices, dtype=int)
        return TrackSet(
            xy=self.xy[idx],
            valid=self.valid[idx],
            ids=[self.ids[i] for i in idx],
            source=self.source,
        )


class LatentSequence(BaseModel):
    """T+1 latent grids (C x H_l x W_l) sharing one pixel stride."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frames: np.ndarray  # (T+1, C, H_l, W_l)
    stride: float = Field(default=8.0, gt=0)

    @model_validator(mode="after")
    def four_dimensional(self) -> "LatentSequence":
        if self.frames.ndim != 4:
            raise ValueError(f"latents must have shape (T+1, C, H, W), got {self.frames.shape}")
        return self

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])


class MotionWeights(BaseModel):
    """Per-track weights w_i >= 0 summing to one."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w: np.ndarray  # (N,)

    def __len__(self) -> int:
        return int(self.w.shape[0])

"""
File-format helpers shared by services and the CLI.

JSON is always written sorted and indented so identical inputs give
byte-identical files.
"""

import json
import logging
from pathlib import Path
from typing import Any, List

import numpy as np
from PIL import Image

logger = logging.getLogger(__name__)


def write_ppm(path: str | Path, image: np.ndarray) -> Path:
    """Write an (H, W, 3) uint8 raster as binary PPM (P6)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(path, format="PPM")
    return path


def read_ppm(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def write_frames(frames: List[np.ndarray], out_dir: str | Path) -> List[Path]:
    """One PPM per frame, named frame_%05d.ppm."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [write_ppm(out / f"frame_{i:05d}.ppm", frame) for i, frame in enumerate(frames)]
    logger.info("Wrote %d frames to %s", len(paths), out)
    return paths


def dumps_json(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


"""
Concurrent GAE evaluation over a directory of trajectory pairs.

A pair is ``<name>.gt.txt`` + ``<name>.est.txt``. Alignment is CPU-bound
numpy work, so each pair runs in the thread pool (asyncio.to_thread) and
results are gathered back in name order.
"""

import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from driverse.exceptions import DriverseError, ParameterError
from driverse.services.alignment_service import gae_report, read_tum

logger = logging.getLogger(__name__)

GT_SUFFIX = ".gt.txt"
EST_SUFFIX = ".est.txt"


def find_pairs(directory: str | Path) -> List[str]:
    """Names with both files present; orphans are logged and skipped."""
    root = Path(directory)
    if not root.is_dir():
        raise ParameterError(f"batch directory not found: {root}")
    gt_names = {p.name[: -len(GT_SUFFIX)] for p in root.glob(f"*{GT_SUFFIX}")}
    est_names = {p.name[: -len(EST_SUFFIX)] for p in root.glob(f"*{EST_SUFFIX}")}
    for orphan in sorted(gt_names ^ est_names):
        logger.warning("Skipping %s: missing ground-truth or estimate file", orphan)
    return sorted(gt_names & est_names)


def evaluate_pair(directory: Path, name: str, frame_rate: float, segment_length: Optional[int]) -> Dict[str, Any]:
    """One entry of the batch report; domain errors are recorded instead of raised."""
    try:
        gt = read_tum(directory / f"{name}{GT_SUFFIX}")
        est = read_tum(directory / f"{name}{EST_SUFFIX}")
        report = gae_report(est, gt, frame_rate, segment_length)
        return {"name": name, **report.model_dump(mode="json")}
    except DriverseError as e:
        logger.warning("Pair %s failed: %s", name, e.detail)
        return {"name": name, **e.to_dict()}


async def evaluate_batch(
    directory: str | Path,
    frame_rate: float = 10.0,
    segment_length: Optional[int] = None,
) -> List[Dict[str, Any]]:
    root = Path(directory)
    names = find_pairs(root)
    if not names:
        raise ParameterError(f"no <name>{GT_SUFFIX} / <name>{EST_SUFFIX} pairs in {root}")
    logger.info("Evaluating %d trajectory pair(s) in %s", len(names), root)
    results = await asyncio.gather(
        *(asyncio.to_thread(evaluate_pair, root, name, frame_rate, segment_length) for name in names)
    )
    return list(results)

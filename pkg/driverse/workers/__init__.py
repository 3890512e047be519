"""Orchestration workers."""

from driverse.workers.batch_evaluator import evaluate_batch
from driverse.workers.pipeline_runner import run_pipeline

__all__ = ["evaluate_batch", "run_pipeline"]

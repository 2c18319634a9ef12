"""Orchestration: run configuration, stage execution, CLI, and HTTP service."""

from .config import RunConfig, load_config
from .stages import RunState, run_stage1, run_stage2, run_stage3, summarize_distribution

__all__ = [
    "RunConfig",
    "load_config",
    "RunState",
    "run_stage1",
    "run_stage2",
    "run_stage3",
    "summarize_distribution",
]

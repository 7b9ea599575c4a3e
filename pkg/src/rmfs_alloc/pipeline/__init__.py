"""Two-stage runs, allocation plans and the independent plan validator."""

from rmfs_alloc.pipeline.plan import AllocationPlan, extract_plan, normalize_idle_racks
from rmfs_alloc.pipeline.run import (
    RunOptions,
    RunReport,
    RunResult,
    StageReport,
    run_two_stage,
    single_rack_witness,
)
from rmfs_alloc.pipeline.validate import ValidationResult, Violation, validate

__all__ = [
    "AllocationPlan",
    "RunOptions",
    "RunReport",
    "RunResult",
    "StageReport",
    "ValidationResult",
    "Violation",
    "extract_plan",
    "normalize_idle_racks",
    "run_two_stage",
    "single_rack_witness",
    "validate",
]

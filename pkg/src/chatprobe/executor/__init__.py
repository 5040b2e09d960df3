"""Query execution: predictions, scores, explanations, perturbations, meta."""

from .run import (
    BackendCall,
    COT_STRATEGIES,
    CotStrategy,
    EXPERTISE_LEVELS,
    EmptySubset,
    ExecutionResult,
    Executor,
    ExecutorError,
    ExpertiseLevel,
    PAGE_LIMIT,
    RangeError,
    RunContext,
    load_task_prompts,
)
from .templates import TemplateLibrary

__all__ = [
    "BackendCall",
    "COT_STRATEGIES",
    "CotStrategy",
    "EXPERTISE_LEVELS",
    "EmptySubset",
    "ExecutionResult",
    "Executor",
    "ExecutorError",
    "ExpertiseLevel",
    "PAGE_LIMIT",
    "RangeError",
    "RunContext",
    "TemplateLibrary",
    "load_task_prompts",
]

"""Local-first intent routing over a custom database of task macros."""

from .errors import MacroRouterError
from .pipeline import PipelineConfig, RouteDecision, Router, blended_score
from .registry import MacroRecord, MacroRegistry

__all__ = [
    "MacroRouterError",
    "MacroRecord",
    "MacroRegistry",
    "PipelineConfig",
    "RouteDecision",
    "Router",
    "blended_score",
]

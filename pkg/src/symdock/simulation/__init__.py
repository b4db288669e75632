from .batch import BatchSummary, run_batch, sample_winning_starts
from .episode import EpisodeConfig, EpisodeRunner, run_episode
from .metrics import EpisodeMetrics, Outcome, compute_metrics
from .planners import (
    LocalPlanner,
    PlanDecision,
    Planner,
    RemotePlanner,
    SynthesisCache,
    plan_action,
)
from .trajectory import Trajectory


__all__ = [
    "BatchSummary",
    "EpisodeConfig",
    "EpisodeMetrics",
    "EpisodeRunner",
    "LocalPlanner",
    "Outcome",
    "PlanDecision",
    "Planner",
    "RemotePlanner",
    "SynthesisCache",
    "Trajectory",
    "compute_metrics",
    "plan_action",
    "run_batch",
    "run_episode",
    "sample_winning_starts",
]

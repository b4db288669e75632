from .export import read_controller_csv, write_controller_csv
from .solver import (
    ReachAvoidSolver,
    SynthesisResult,
    solve_explicit,
    solve_reach_avoid,
)
from .synthesizer import Synthesizer, build_symbolic, resynthesize
from .tables import (
    AT_TARGET,
    NOT_WINNING,
    UNREACHABLE,
    ActionStatus,
    ControllerTable,
    ValueTable,
    safe_actions,
)


__all__ = [
    "AT_TARGET",
    "NOT_WINNING",
    "UNREACHABLE",
    "ActionStatus",
    "ControllerTable",
    "ReachAvoidSolver",
    "SynthesisResult",
    "Synthesizer",
    "ValueTable",
    "build_symbolic",
    "read_controller_csv",
    "resynthesize",
    "safe_actions",
    "solve_explicit",
    "solve_reach_avoid",
    "write_controller_csv",
]

from .grid import INPUT_BOUNDS, CellId, Grid, InputGrid, cell_center, quantize
from .labels import CellLabel, label_cells
from .symbolic import (
    BLOCKED,
    SuccessorBox,
    SymbolicSystem,
    TransitionTable,
    growth_bound,
    nominal_successor,
    successors,
)


__all__ = [
    "BLOCKED",
    "INPUT_BOUNDS",
    "CellId",
    "CellLabel",
    "Grid",
    "InputGrid",
    "SuccessorBox",
    "SymbolicSystem",
    "TransitionTable",
    "cell_center",
    "growth_bound",
    "label_cells",
    "nominal_successor",
    "quantize",
    "successors",
]

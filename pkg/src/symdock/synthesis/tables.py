"""Value and controller tables produced by reach-avoid synthesis."""

import enum
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from symdock.abstraction.grid import CellId, Grid, InputGrid
from symdock.abstraction.labels import CellLabel
from symdock.dynamics import BodyVelocity, Pose


#: Value of cells from which the target cannot be enforced.
UNREACHABLE = np.iinfo(np.int32).max


class ActionStatus(enum.Enum):
    """Outcomes of :func:`safe_actions` other than an action list."""

    AT_TARGET = "at_target"
    NOT_WINNING = "not_winning"

    def __repr__(self):
        return f"{type(self).__name__}.{self.name}"


AT_TARGET = ActionStatus.AT_TARGET
NOT_WINNING = ActionStatus.NOT_WINNING


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Steps-to-target of every cell.

    Attributes:
        grid: The state grid.
        values: ``nx x ny x npsi`` ``int32`` array; :data:`UNREACHABLE`
            marks cells outside the winning set.
        labels: Cell labels the values were computed for.
    """

    grid: Grid
    values: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"Values of shape {self.values.shape} do not match the grid "
                f"shape {self.grid.shape}"
            )

    @property
    def winning(self) -> np.ndarray:
        """Boolean mask of the winning set (target cells included)."""
        return self.values != UNREACHABLE

    @property
    def winning_count(self) -> int:
        return int(np.count_nonzero(self.winning))

    def value(self, cell: CellId) -> Optional[int]:
        """Steps-to-target of ``cell``, or None if it is not winning."""
        value = int(self.values[tuple(cell)])
        return None if value == UNREACHABLE else value

    def is_winning(self, cell: CellId) -> bool:
        return bool(self.winning[tuple(cell)])

    def is_target(self, cell: CellId) -> bool:
        return self.labels[tuple(cell)] == CellLabel.TARGET


@dataclass(frozen=True, eq=False)
class ControllerTable:
    """Inputs enabled at each cell.

    Attributes:
        grid: The state grid.
        inputs: The input grid; column ``k`` of ``enabled`` is input ``k``.
        enabled: ``ncells x ninputs`` boolean array, rows in flat cell order.
        values: The value table the controller was extracted from.
    """

    grid: Grid
    inputs: InputGrid
    enabled: np.ndarray
    values: ValueTable

    def __post_init__(self):
        expected = (self.grid.size, len(self.inputs))
        if self.enabled.shape != expected:
            raise ValueError(
                f"Controller of shape {self.enabled.shape} does not match "
                f"{expected}"
            )

    def input_indices(self, cell: CellId) -> List[int]:
        """Enabled input indices of ``cell`` in input-grid order."""
        row = self.enabled[self.grid.flat_index(cell)]
        return [int(index) for index in np.flatnonzero(row)]

    def actions(self, cell: CellId) -> List[BodyVelocity]:
        return [
            self.inputs.velocity(index) for index in self.input_indices(cell)
        ]

    def counts(self) -> np.ndarray:
        """Number of enabled inputs per cell, shaped like the grid."""
        return self.enabled.sum(axis=1).reshape(self.grid.shape)

    def bitmask(self, cell: CellId) -> int:
        """Enabled inputs as an integer with bit ``k`` set for input ``k``."""
        return sum(1 << index for index in self.input_indices(cell))


def safe_actions(
    ctrl: ControllerTable, grid: Grid, eta: Pose
) -> Union[List[BodyVelocity], ActionStatus]:
    """Inputs the controller allows at the cell of ``eta``.

    Returns:
        :data:`AT_TARGET` for target cells, the enabled inputs for winning
        cells (in input-grid order) and :data:`NOT_WINNING` otherwise.

    Raises:
        OutOfDomain: If ``eta`` lies outside the grid.
    """
    cell = grid.quantize(eta)
    if ctrl.values.is_target(cell):
        return AT_TARGET
    actions = ctrl.actions(cell)
    if not actions:
        return NOT_WINNING
    return actions

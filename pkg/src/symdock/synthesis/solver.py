import collections
import concurrent.futures
import time
from dataclasses import dataclass
from typing import Dict, Hashable, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from symdock.abstraction.labels import CellLabel
from symdock.abstraction.symbolic import SymbolicSystem
from symdock.exceptions import NoWinningRegion
from symdock.synthesis.tables import UNREACHABLE, ControllerTable, ValueTable
from symdock.tools import printer, worker_count


@dataclass
class SynthesisResult:
    values: ValueTable
    controller: ControllerTable
    sweeps: int
    time: float
    winning: int
    log: Optional[Dict] = None

    @property
    def elapsed_ms(self) -> float:
        return 1000.0 * self.time


def box_maxima(values: np.ndarray, max_extent: Sequence[int]) -> np.ndarray:
    """Maxima of ``values`` over every box with extents up to ``max_extent``.

    Entry ``((ex - 1) * Ey + (ey - 1)) * Ep + (ep - 1)`` of the leading axis,
    at position ``(ix, iy, ipsi)``, is the maximum over the box with lower
    corner ``(ix, iy, ipsi)`` and extents ``(ex, ey, ep)``. Position axes are
    padded with :data:`UNREACHABLE`; the heading axis wraps around.

    Returns:
        A flat array of ``Ex * Ey * Ep * ncells + 1`` values whose last entry
        is an :data:`UNREACHABLE` sentinel for blocked pairs.
    """
    ex_max, ey_max, ep_max = max_extent
    nx, ny, npsi = values.shape
    padded = np.pad(
        values,
        ((0, ex_max - 1), (0, ey_max - 1), (0, 0)),
        constant_values=UNREACHABLE,
    )
    padded = np.concatenate([padded, padded[:, :, : ep_max - 1]], axis=2)

    stack = np.empty((ex_max * ey_max * ep_max * values.size + 1), np.int32)
    stack[-1] = UNREACHABLE
    blocks = stack[:-1].reshape(ex_max, ey_max, ep_max, nx, ny, npsi)

    along_x = padded[:nx]
    for ex in range(ex_max):
        if ex > 0:
            along_x = np.maximum(along_x, padded[ex : ex + nx])
        along_y = along_x[:, :ny]
        for ey in range(ey_max):
            if ey > 0:
                along_y = np.maximum(along_y, along_x[:, ey : ey + ny])
            along_psi = along_y[:, :, :npsi]
            for ep in range(ep_max):
                if ep > 0:
                    along_psi = np.maximum(
                        along_psi, along_y[:, :, ep : ep + npsi]
                    )
                blocks[ex, ey, ep] = along_psi
    return stack


class ReachAvoidSolver:
    """Backward value iteration for reach-avoid games on a grid abstraction.

    Every sweep evaluates the pending cells against the previous sweep's
    values: a cell's candidate value is one plus the smallest worst-case
    successor value over its inputs. Successor boxes that leave the boundary
    or touch an obstacle evaluate to :data:`UNREACHABLE`, which excludes the
    input. The iteration stops at the first sweep that changes nothing.

    Args:
        max_sweeps: Upper bound on the number of sweeps. Defaults to the
            number of cells, which always suffices.
        workers: Number of threads for a sweep. Defaults to
            :func:`symdock.tools.worker_count`.
        chunk_size: Rows per work item within a sweep.
        verbosity: Level of information printed while solving: 0 is silent,
            2 prints one line per sweep.
        log_verbosity: Level of information logged while solving: 0 logs
            nothing, 1 logs every sweep.
        stream: Text stream for printed output.
    """

    def __init__(
        self,
        max_sweeps: Optional[int] = None,
        workers: Optional[int] = None,
        chunk_size: int = 8192,
        verbosity: int = 0,
        log_verbosity: int = 0,
        stream=None,
    ):
        if chunk_size < 1:
            raise ValueError(f"Chunk size must be positive, got {chunk_size}")
        self._max_sweeps = max_sweeps
        self._workers = worker_count(workers)
        self._chunk_size = chunk_size
        self._verbosity = verbosity
        self._log_verbosity = log_verbosity
        self._stream = stream
        self._log = None

    def __str__(self):
        return type(self).__name__

    def _initialize_log(self, symbolic: SymbolicSystem):
        self._log = {
            "solver": str(self),
            "solver_parameters": {
                "max_sweeps": self._max_sweeps,
                "workers": self._workers,
                "chunk_size": self._chunk_size,
            },
            "grid": symbolic.grid.describe(),
            "inputs": symbolic.inputs.describe(),
            "sweeps": collections.defaultdict(list)
            if self._log_verbosity >= 1
            else None,
        }

    def _add_log_entry(self, **kwargs):
        if self._log_verbosity <= 0:
            return
        self._log["sweeps"]["time"].append(time.time())
        for key, value in kwargs.items():
            self._log["sweeps"][key].append(value)

    def _worst_case(self, executor, stack, index, rows):
        """Per-input worst-case successor values of ``rows``."""
        if executor is None or rows.size <= self._chunk_size:
            return stack[index[rows]]
        chunks = [
            rows[start : start + self._chunk_size]
            for start in range(0, rows.size, self._chunk_size)
        ]
        return np.concatenate(
            list(executor.map(lambda chunk: stack[index[chunk]], chunks))
        )

    def run(self, symbolic: SymbolicSystem) -> SynthesisResult:
        """Solve the reach-avoid game of a labeled abstraction.

        Args:
            symbolic: The labeled grid and its transitions.

        Returns:
            The value table, the controller listing every value-decreasing
            input at each winning non-target cell, and solver statistics.

        Raises:
            NoWinningRegion: If there is no target cell or no other cell can
                be steered into the target.
        """
        grid = symbolic.grid
        labels = symbolic.labels.reshape(-1)
        layout = symbolic.transitions.layout

        column_printer = printer.make_printer(
            self._verbosity,
            columns=[
                ("Sweep", "6d"),
                ("Updated", "8d"),
                ("Pending", "8d"),
                ("Time [ms]", "9.2f"),
            ],
            stream=self._stream,
        )
        if self._verbosity >= 1:
            print(f"Synthesizing on {grid.size} cells...", file=self._stream)
        column_printer.print_header()
        self._initialize_log(symbolic)

        start_time = time.time()
        values = np.full(grid.size, UNREACHABLE, dtype=np.int32)
        target = labels == CellLabel.TARGET
        values[target] = 0
        if not np.any(target):
            raise NoWinningRegion("The abstraction has no target cell")
        pending = np.flatnonzero(labels == CellLabel.FREE)

        max_sweeps = (
            self._max_sweeps if self._max_sweeps is not None else grid.size
        )
        executor = None
        if self._workers > 1:
            executor = concurrent.futures.ThreadPoolExecutor(self._workers)
        try:
            sweep = 0
            while sweep < max_sweeps and pending.size:
                sweep += 1
                sweep_start = time.time()
                stack = box_maxima(
                    values.reshape(grid.shape), layout.max_extent
                )
                best = self._worst_case(
                    executor, stack, layout.index, pending
                ).min(axis=1)
                reached = best != UNREACHABLE
                values[pending[reached]] = best[reached] + 1
                pending = pending[~reached]
                updated = int(np.count_nonzero(reached))
                column_printer.print_row(
                    [
                        sweep,
                        updated,
                        pending.size,
                        1000.0 * (time.time() - sweep_start),
                    ]
                )
                self._add_log_entry(
                    sweep=sweep, updated=updated, pending=pending.size
                )
                if not updated:
                    break

            stack = box_maxima(values.reshape(grid.shape), layout.max_extent)
            rows = np.arange(grid.size)
            worst = self._worst_case(executor, stack, layout.index, rows)
        finally:
            if executor is not None:
                executor.shutdown()

        progressing = (values != UNREACHABLE) & (values > 0)
        enabled = (worst < values[:, np.newaxis]) & progressing[:, np.newaxis]
        winning = int(np.count_nonzero(values != UNREACHABLE))
        if not np.any(progressing):
            raise NoWinningRegion(
                "No cell outside the target can be steered into it"
            )

        value_table = ValueTable(
            grid=grid,
            values=values.reshape(grid.shape),
            labels=symbolic.labels,
        )
        elapsed = time.time() - start_time
        if self._verbosity >= 1:
            print(
                f"Terminated - fixed point after {sweep} sweeps, "
                f"{elapsed:.3f} seconds; {winning} winning cells.",
                file=self._stream,
            )
        return SynthesisResult(
            values=value_table,
            controller=ControllerTable(
                grid=grid,
                inputs=symbolic.inputs,
                enabled=enabled,
                values=value_table,
            ),
            sweeps=sweep,
            time=elapsed,
            winning=winning,
            log=self._log,
        )


def solve_reach_avoid(
    symbolic: SymbolicSystem, **kwargs
) -> Tuple[ValueTable, ControllerTable]:
    """Value and controller tables of a labeled abstraction.

    Keyword arguments are passed on to :class:`ReachAvoidSolver`.
    """
    result = ReachAvoidSolver(**kwargs).run(symbolic)
    return result.values, result.controller


def solve_explicit(
    transitions: Mapping[Hashable, Sequence[Optional[Set[Hashable]]]],
    targets: Set[Hashable],
    obstacles: Set[Hashable] = frozenset(),
) -> Tuple[Dict[Hashable, Optional[int]], Dict[Hashable, Tuple[int, ...]]]:
    """Reach-avoid values of an explicit nondeterministic transition system.

    A worklist fixed point over successor sets, independent of the grid
    machinery. Used as an oracle for :class:`ReachAvoidSolver` on small
    systems.

    Args:
        transitions: Maps every state to its per-input successor sets;
            ``None`` marks a blocked input.
        targets: Target states.
        obstacles: States that must never be visited.

    Returns:
        Tuple ``(values, controller)``: steps-to-target per state (None if
        not winning) and the value-decreasing input indices per state.
    """
    values = {
        state: (0 if state in targets and state not in obstacles else None)
        for state in transitions
    }

    def worst(successors):
        if successors is None or not successors:
            return None
        worst_value = 0
        for successor in successors:
            value = values.get(successor)
            if value is None:
                return None
            worst_value = max(worst_value, value)
        return worst_value

    changed = True
    while changed:
        changed = False
        update = {}
        for state, per_input in transitions.items():
            if values[state] is not None or state in obstacles:
                continue
            candidates = [worst(successors) for successors in per_input]
            candidates = [value for value in candidates if value is not None]
            if candidates:
                update[state] = 1 + min(candidates)
        if update:
            values.update(update)
            changed = True

    controller = {}
    for state, per_input in transitions.items():
        value = values[state]
        if not value:
            controller[state] = ()
            continue
        controller[state] = tuple(
            index
            for index, successors in enumerate(per_input)
            if worst(successors) is not None and worst(successors) < value
        )
    return values, controller

"""Epoch-wise re-synthesis with a shared transition cache."""

import collections
import threading
import time
from typing import Optional, Tuple

from symdock.abstraction.grid import Grid, InputGrid
from symdock.abstraction.labels import label_cells
from symdock.abstraction.symbolic import (
    SymbolicSystem,
    TransitionKey,
    TransitionTable,
)
from symdock.core.scenario import Scenario
from symdock.synthesis.solver import ReachAvoidSolver, SynthesisResult
from symdock.synthesis.tables import ControllerTable, ValueTable


def build_symbolic(
    scenario: Scenario, transitions: Optional[TransitionTable] = None
) -> SymbolicSystem:
    """Labeled abstraction of ``scenario``.

    Args:
        scenario: The arena.
        transitions: Transition table to reuse; it must belong to the
            scenario's grid, input grid and sampling period.
    """
    grid = Grid.from_config(scenario.section("grid"), scenario.boundary)
    inputs = InputGrid.from_config(scenario.section("inputs"))
    if transitions is None:
        transitions = TransitionTable(grid, inputs, scenario.sampling_period)
    elif transitions.key != TransitionKey(
        grid,
        inputs,
        scenario.sampling_period,
        transitions.key.growth_scale,
    ):
        raise ValueError("The transition table belongs to another abstraction")
    return SymbolicSystem(
        grid, inputs, label_cells(grid, scenario), transitions
    )


class Synthesizer:
    """Relabels and re-solves scenarios, caching transitions by geometry.

    Transition tables depend only on the grid, the input grid and the
    sampling period, so obstacles and targets may change from one epoch to
    the next without rebuilding them. The cache is shared between threads;
    tables are immutable once built. Each call runs its own solver instance.

    Args:
        cache_size: Number of transition tables to keep.
        verbosity: Level of information printed per call: 0 is silent, 1
            prints one line per re-synthesis, 2 adds the solver's sweeps.
        log_verbosity: Passed on to the solver.
        stream: Text stream for printed output.
        **solver_kwargs: Further :class:`ReachAvoidSolver` arguments.
    """

    def __init__(
        self,
        cache_size: int = 4,
        verbosity: int = 0,
        log_verbosity: int = 0,
        stream=None,
        **solver_kwargs,
    ):
        self._solver_kwargs = dict(
            solver_kwargs,
            verbosity=max(verbosity - 1, 0),
            log_verbosity=log_verbosity,
            stream=stream,
        )
        # Raise on invalid solver arguments here rather than per call.
        ReachAvoidSolver(**self._solver_kwargs)
        self._verbosity = verbosity
        self._stream = stream
        self._cache_size = cache_size
        self._cache = collections.OrderedDict()
        self._lock = threading.Lock()

    def transitions_for(
        self, grid: Grid, inputs: InputGrid, tau_s: float
    ) -> TransitionTable:
        """Cached transition table of an abstraction geometry."""
        key = TransitionKey(grid, inputs, float(tau_s))
        with self._lock:
            table = self._cache.get(key)
            if table is None:
                table = TransitionTable(grid, inputs, tau_s)
                # Build the flat layout before the table is shared.
                table.layout
                self._cache[key] = table
                while len(self._cache) > self._cache_size:
                    self._cache.popitem(last=False)
            else:
                self._cache.move_to_end(key)
            return table

    @property
    def cached_geometries(self) -> int:
        return len(self._cache)

    def resynthesize(self, scenario: Scenario) -> SynthesisResult:
        """Label ``scenario`` and solve it, reusing cached transitions.

        Raises:
            NoWinningRegion: As :meth:`ReachAvoidSolver.run`.
        """
        start_time = time.time()
        grid = Grid.from_config(scenario.section("grid"), scenario.boundary)
        inputs = InputGrid.from_config(scenario.section("inputs"))
        transitions = self.transitions_for(
            grid, inputs, scenario.sampling_period
        )
        solver = ReachAvoidSolver(**self._solver_kwargs)
        result = solver.run(build_symbolic(scenario, transitions))
        result.time = time.time() - start_time
        if self._verbosity >= 1:
            print(
                f"cells={grid.size} winning={result.winning} "
                f"sweeps={result.sweeps} synth_ms={result.elapsed_ms:.1f}",
                file=self._stream,
            )
        return result


def resynthesize(
    scenario: Scenario, synthesizer: Optional[Synthesizer] = None
) -> Tuple[ValueTable, ControllerTable, float]:
    """Re-solve ``scenario``.

    Returns:
        The value table, the controller and the wall-clock time in
        milliseconds.
    """
    if synthesizer is None:
        synthesizer = Synthesizer()
    result = synthesizer.resynthesize(scenario)
    return result.values, result.controller, result.elapsed_ms

"""Epoch planners: synthesis, lookup and selection behind one interface.

The closed loop asks a planner for the command of the next epoch. The
in-process planner synthesizes locally; the remote planner delegates to a
synthesis server. Both run the same :func:`plan_action`, so they return the
same decision for the same request.
"""

import abc
import threading
from dataclasses import dataclass
from typing import Optional, Union

from symdock.abstraction.grid import Grid
from symdock.core.scenario import Scenario
from symdock.dynamics import BodyVelocity, Pose
from symdock.selection import SelectionWeights, SelectorState, select
from symdock.synthesis.solver import SynthesisResult
from symdock.synthesis.synthesizer import Synthesizer
from symdock.synthesis.tables import (
    ActionStatus,
    ControllerTable,
    safe_actions,
)


@dataclass(frozen=True)
class PlanDecision:
    """Answer to one planning request.

    Attributes:
        action: The selected velocity, or the status at the target or
            outside the winning set.
        candidate_count: Number of safe inputs at the measured cell.
        value: Steps-to-target of the measured cell, None if not winning.
        synth_ms: Time spent synthesizing for this request; zero when the
            controller was cached.
        epoch_id: Epoch the request was made for.
    """

    action: Union[BodyVelocity, ActionStatus]
    candidate_count: int
    value: Optional[int]
    synth_ms: float
    epoch_id: int


def plan_action(
    controller: ControllerTable,
    grid: Grid,
    weights: SelectionWeights,
    state: Pose,
    prev_action: BodyVelocity,
    epoch_id: int,
    synth_ms: float = 0.0,
) -> PlanDecision:
    """Look up the safe inputs at ``state`` and select one.

    Selection starts from ``prev_action``, so the decision depends on the
    request only and not on the history of the planner.
    """
    actions = safe_actions(controller, grid, state)
    value = controller.values.value(grid.quantize(state))
    if isinstance(actions, ActionStatus):
        return PlanDecision(actions, 0, value, synth_ms, epoch_id)
    action = select(actions, SelectorState(prev_action), weights)
    return PlanDecision(action, len(actions), value, synth_ms, epoch_id)


class Planner(metaclass=abc.ABCMeta):
    """Source of epoch commands for the closed loop."""

    def __str__(self):
        return type(self).__name__

    @abc.abstractmethod
    def plan(
        self,
        scenario: Scenario,
        state: Pose,
        prev_action: BodyVelocity,
        epoch_id: int,
    ) -> PlanDecision:
        """Command for the epoch starting at ``state``.

        Raises:
            EpochMiss: If no answer arrives in time.
            NoWinningRegion: If ``scenario`` admits no controller.
            OutOfDomain: If ``state`` lies outside the grid.
        """

    def close(self):
        """Release resources held by the planner."""

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class SynthesisCache:
    """Solved controllers keyed by scenario fingerprint.

    Synthesis is deterministic, so a scenario that was solved before is not
    solved again.

    Args:
        synthesizer: Synthesizer to run on misses.
        size: Number of controllers to keep.
    """

    def __init__(
        self, synthesizer: Optional[Synthesizer] = None, size: int = 8
    ):
        self.synthesizer = synthesizer or Synthesizer()
        self._size = size
        self._results = {}
        self._order = []
        self._lock = threading.Lock()
        self._pending = {}

    def __contains__(self, scenario: Scenario):
        return scenario.fingerprint in self._results

    def get(self, scenario: Scenario):
        """Solved controller of ``scenario`` and whether it was fresh.

        Concurrent requests for the same scenario wait for one synthesis.

        Returns:
            Tuple ``(result, fresh)``.
        """
        key = scenario.fingerprint
        with self._lock:
            if key in self._results:
                return self._results[key], False
            event = self._pending.get(key)
            owner = event is None
            if owner:
                event = self._pending[key] = threading.Event()
        if not owner:
            event.wait()
            with self._lock:
                if key in self._results:
                    return self._results[key], False
            return self.get(scenario)
        try:
            result = self.synthesizer.resynthesize(scenario)
            with self._lock:
                self._results[key] = result
                self._order.append(key)
                while len(self._order) > self._size:
                    self._results.pop(self._order.pop(0))
            return result, True
        finally:
            with self._lock:
                del self._pending[key]
            event.set()


def _decide(
    result: SynthesisResult,
    fresh: bool,
    scenario: Scenario,
    state: Pose,
    prev_action: BodyVelocity,
    epoch_id: int,
) -> PlanDecision:
    return plan_action(
        result.controller,
        result.controller.grid,
        SelectionWeights.from_config(scenario.section("weights")),
        state,
        prev_action,
        epoch_id,
        synth_ms=result.elapsed_ms if fresh else 0.0,
    )


class LocalPlanner(Planner):
    """Plans in-process.

    Args:
        synthesizer: Synthesizer to use; a default one when omitted.
        cache: Whether to reuse controllers of scenarios solved before.
            Without the cache every epoch re-synthesizes.
    """

    def __init__(
        self, synthesizer: Optional[Synthesizer] = None, cache: bool = True
    ):
        self.synthesizer = synthesizer or Synthesizer()
        self._cache = SynthesisCache(self.synthesizer) if cache else None

    def plan(self, scenario, state, prev_action, epoch_id):
        if self._cache is None:
            result, fresh = self.synthesizer.resynthesize(scenario), True
        else:
            result, fresh = self._cache.get(scenario)
        return _decide(result, fresh, scenario, state, prev_action, epoch_id)

    def controller(self, scenario: Scenario) -> ControllerTable:
        """Controller of ``scenario``, synthesizing it if needed."""
        if self._cache is None:
            return self.synthesizer.resynthesize(scenario).controller
        return self._cache.get(scenario)[0].controller


class RemotePlanner(Planner):
    """Plans through a synthesis server.

    Args:
        client: Connected :class:`symdock.service.client.SynthesisClient`.
        send_scenario: Whether to send the scenario document with every
            request. By default it is only sent when it differs from the
            scenario the server has preloaded.
    """

    def __init__(self, client, send_scenario: Optional[bool] = None):
        self.client = client
        self._send_scenario = send_scenario

    def plan(self, scenario, state, prev_action, epoch_id):
        send = self._send_scenario
        if send is None:
            send = scenario.fingerprint != self.client.server_fingerprint
        response = self.client.synthesize(
            state,
            prev_action,
            epoch_id,
            scenario=scenario if send else None,
        )
        return PlanDecision(
            action=response.selected,
            candidate_count=response.candidate_count,
            value=response.value,
            synth_ms=response.synth_ms,
            epoch_id=response.epoch_id,
        )

    def close(self):
        self.client.close()

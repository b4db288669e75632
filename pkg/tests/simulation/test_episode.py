import io

import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.abstraction.grid import INPUT_BOUNDS
from symdock.core.scenario import Rect
from symdock.dynamics import BodyVelocity, Pose
from symdock.exceptions import (
    EpochMiss,
    InvalidStart,
    NoWinningRegion,
    OutOfDomain,
)
from symdock.simulation.episode import EpisodeConfig, run_episode
from symdock.simulation.metrics import Outcome
from symdock.simulation.planners import PlanDecision, Planner
from symdock.synthesis.tables import NOT_WINNING


START = Pose(7.5, 1.0, np.pi)


class ScriptedPlanner(Planner):
    """Answers from a list of per-epoch actions or exceptions."""

    def __init__(self, script, default=None):
        self.script = dict(script)
        self.default = default or BodyVelocity.zero()
        self.scenarios = []

    def plan(self, scenario, state, prev_action, epoch_id):
        self.scenarios.append(scenario)
        answer = self.script.get(epoch_id, self.default)
        if isinstance(answer, Exception):
            raise answer
        return PlanDecision(answer, 1, 1, 0.0, epoch_id)


class TestEpisodeConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0},
            {"dt": 3.0},
            {"dt": 0.03},
            {"max_duration": 0.0},
            {"hold_time": -1.0},
            {"berth_gain": -0.5},
            {"observer": "gps"},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            EpisodeConfig(START, **kwargs)

    def test_replace(self):
        config = EpisodeConfig(START).replace(seed=3)
        assert config.seed == 3
        assert config.start == START


class TestStart:
    @pytest.mark.parametrize(
        "start",
        [
            Pose(5.5, 1.0, 0.0),
            Pose(9.0, 1.0, 0.0),
            Pose(0.2, 3.0, 0.0),
        ],
    )
    def test_invalid_start(self, scenario, start):
        with pytest.raises(InvalidStart):
            run_episode(scenario, EpisodeConfig(start), ScriptedPlanner({}))


class TestScriptedEpisodes:
    @pytest.fixture(autouse=True)
    def setup(self, scenario):
        self.scenario = scenario
        self.config = EpisodeConfig(START, dt=0.05, max_duration=6.0)

    def test_timeout_at_rest(self):
        traj, metrics = run_episode(
            self.scenario, self.config, ScriptedPlanner({})
        )
        assert metrics.outcome == Outcome.TIMEOUT
        assert len(traj) == 121
        np_testing.assert_array_equal(
            traj.epoch_ids[[0, 40, 80, 120]], [0, 1, 2, 3]
        )
        np_testing.assert_allclose(traj.poses, [START.to_array()] * 121)

    def test_missed_epochs_hold_then_stop(self):
        forward = BodyVelocity(0.1, 0.0, 0.0)
        planner = ScriptedPlanner(
            {0: forward, 1: EpochMiss("late"), 2: EpochMiss("late")}
        )
        with pytest.warns(RuntimeWarning):
            traj, metrics = run_episode(self.scenario, self.config, planner)
        assert metrics.epoch_misses == 2
        references = traj.references[:, 0]
        epochs = traj.epoch_ids
        assert np.all(references[epochs == 1] == 0.1)
        assert np.all(references[epochs == 2] == 0.0)
        # Heading pi: positive surge drives towards negative x.
        assert traj.poses[-1, 0] < START.x

    def test_not_winning_decision(self):
        planner = ScriptedPlanner({0: NOT_WINNING})
        traj, metrics = run_episode(self.scenario, self.config, planner)
        assert metrics.outcome == Outcome.NOT_WINNING
        assert len(traj) == 1

    def test_no_winning_region(self):
        planner = ScriptedPlanner({1: NoWinningRegion("blocked")})
        traj, metrics = run_episode(self.scenario, self.config, planner)
        assert metrics.outcome == Outcome.NOT_WINNING
        assert traj.t[-1] == pytest.approx(2.0)

    def test_out_of_domain(self):
        planner = ScriptedPlanner({1: OutOfDomain("off the grid")})
        with pytest.warns(RuntimeWarning, match="left the grid"):
            traj, metrics = run_episode(self.scenario, self.config, planner)
        assert metrics.outcome == Outcome.NOT_WINNING
        assert metrics.completion_time is None
        assert traj.t[-1] == pytest.approx(2.0)

    def test_scenario_updates(self):
        planner = ScriptedPlanner({})
        updated = self.scenario.replace(
            obstacles=self.scenario.obstacles
            + (Rect(6.5, 7.0, 4.5, 5.0),)
        )
        run_episode(
            self.scenario, self.config, planner, scenario_updates={2: updated}
        )
        assert planner.scenarios[:2] == [self.scenario] * 2
        assert planner.scenarios[2:] == [updated] * 2

    def test_collision_ends_episode(self):
        planner = ScriptedPlanner({}, default=BodyVelocity(0.2, 0.0, 0.0))
        config = self.config.replace(max_duration=60.0)
        traj, metrics = run_episode(self.scenario, config, planner)
        assert metrics.outcome == Outcome.COLLIDED
        assert metrics.min_clearance == 0.0
        assert traj.t[-1] < 60.0

    def test_log(self):
        traj, _ = run_episode(
            self.scenario, self.config, ScriptedPlanner({}), log_verbosity=1
        )
        epochs = traj.log["epochs"]
        assert epochs["epoch"] == [0, 1, 2, 3]
        assert traj.log["config"]["dt"] == 0.05
        assert traj.log["planner"] == "ScriptedPlanner"

    def test_verbose_output(self):
        stream = io.StringIO()
        run_episode(
            self.scenario,
            self.config,
            ScriptedPlanner({}),
            verbosity=2,
            stream=stream,
        )
        lines = stream.getvalue().splitlines()
        assert lines[0].split()[0] == "Epoch"
        assert lines[-1].startswith("Terminated - timeout after 6.00")


class TestSynthesizedEpisodes:
    @pytest.fixture(autouse=True)
    def setup(self, scenario, planner, synthesis):
        self.scenario = scenario
        self.planner = planner
        self.controller = synthesis.controller

    def test_start_at_berth(self, target_poses):
        config = EpisodeConfig(target_poses[True], dt=0.05, hold_time=0.5)
        traj, metrics = run_episode(self.scenario, config, self.planner)
        assert metrics.outcome == Outcome.DOCKED
        assert metrics.completion_time == 0.0
        assert metrics.footprint_in_target
        assert traj.t[-1] == pytest.approx(0.5)

    def test_berths_before_docking(self, target_poses):
        start = target_poses[False]
        config = EpisodeConfig(
            start, dt=0.05, hold_time=0.5, max_duration=60.0
        )
        traj, metrics = run_episode(self.scenario, config, self.planner)
        assert metrics.outcome == Outcome.DOCKED
        assert metrics.completion_time == 0.0
        assert metrics.footprint_in_target
        assert traj.t[-1] > 0.5
        assert metrics.min_clearance > 0
        references = traj.references
        for axis, (lower, upper) in enumerate(INPUT_BOUNDS):
            assert np.all(references[:, axis] >= lower - 1e-12)
            assert np.all(references[:, axis] <= upper + 1e-12)
        np_testing.assert_array_equal(references[:, 2], 0.0)

    def test_outside_berth_without_approach_times_out(self, target_poses):
        config = EpisodeConfig(
            target_poses[False],
            dt=0.05,
            hold_time=0.5,
            max_duration=3.0,
            berth_gain=0.0,
        )
        traj, metrics = run_episode(self.scenario, config, self.planner)
        assert metrics.outcome == Outcome.TIMEOUT
        assert metrics.completion_time is None
        assert not metrics.footprint_in_target
        assert traj.t[-1] == pytest.approx(3.0)

    def test_deterministic(self):
        config = EpisodeConfig(START, dt=0.05, max_duration=10.0)
        first, _ = run_episode(self.scenario, config, self.planner)
        second, _ = run_episode(self.scenario, config, self.planner)
        np_testing.assert_array_equal(first.data, second.data)

    def test_reference_is_a_safe_action(self):
        config = EpisodeConfig(START, dt=0.05, max_duration=30.0)
        traj, metrics = run_episode(
            self.scenario, config, self.planner, log_verbosity=1
        )
        assert metrics.outcome != Outcome.COLLIDED
        epochs = traj.log["epochs"]
        grid = self.controller.grid
        for state, action in zip(epochs["state"], epochs["action"]):
            if not isinstance(action, BodyVelocity):
                continue
            assert action in self.controller.actions(grid.quantize(state))

    def test_estimated_state(self):
        config = EpisodeConfig(
            START, dt=0.05, max_duration=10.0, observer="ekf", noise=True
        )
        traj, metrics = run_episode(self.scenario, config, self.planner)
        assert metrics.outcome != Outcome.COLLIDED
        assert len(traj) > 1
        assert metrics.min_clearance > 0


@pytest.mark.slow
def test_docks_from_lower_right(scenario, planner):
    traj, metrics = run_episode(scenario, EpisodeConfig(START), planner)
    assert metrics.outcome == Outcome.DOCKED
    assert 60.0 <= metrics.completion_time <= 360.0
    assert metrics.min_clearance > 0
    assert metrics.footprint_in_target
    assert np.all(np.diff(traj.t) > 0)

import io

import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.abstraction.grid import Grid, InputGrid
from symdock.abstraction.symbolic import TransitionTable
from symdock.core.scenario import Rect, default_scenario_path, load_scenario
from symdock.dynamics import Pose
from symdock.synthesis.synthesizer import (
    Synthesizer,
    build_symbolic,
    resynthesize,
)


class TestSynthesizer:
    @pytest.fixture(autouse=True)
    def setup(self, small_scenario):
        self.scenario = small_scenario
        self.synthesizer = Synthesizer(workers=1)

    def test_deterministic(self):
        first = self.synthesizer.resynthesize(self.scenario)
        second = Synthesizer(workers=2).resynthesize(self.scenario)
        np_testing.assert_array_equal(
            first.values.values, second.values.values
        )
        np_testing.assert_array_equal(
            first.controller.enabled, second.controller.enabled
        )

    def test_removing_obstacles_grows_winning_set(self):
        base = self.synthesizer.resynthesize(self.scenario)
        open_arena = self.synthesizer.resynthesize(
            self.scenario.replace(obstacles=())
        )
        assert np.all(open_arena.values.winning[base.values.winning])
        assert open_arena.winning > base.winning

    def test_shrinking_target_shrinks_winning_set(self):
        base = self.synthesizer.resynthesize(self.scenario)
        smaller = self.synthesizer.resynthesize(
            self.scenario.replace(target=Rect(0.0, 0.5, 0.5, 0.75))
        )
        assert np.all(base.values.winning[smaller.values.winning])
        assert smaller.winning <= base.winning

    def test_values_never_decrease_with_fewer_targets(self):
        base = self.synthesizer.resynthesize(self.scenario)
        smaller = self.synthesizer.resynthesize(
            self.scenario.replace(target=Rect(0.0, 0.5, 0.5, 0.75))
        )
        both = smaller.values.winning
        assert np.all(smaller.values.values[both] >= base.values.values[both])

    def test_transitions_are_cached(self):
        self.synthesizer.resynthesize(self.scenario)
        self.synthesizer.resynthesize(
            self.scenario.replace(obstacles=(Rect(1.0, 1.25, 1.0, 1.25),))
        )
        assert self.synthesizer.cached_geometries == 1
        grid = Grid.from_config(
            self.scenario.section("grid"), self.scenario.boundary
        )
        table = self.synthesizer.transitions_for(grid, InputGrid(), 2.0)
        assert table is self.synthesizer.transitions_for(
            grid, InputGrid(), 2.0
        )

    def test_cache_eviction(self):
        synthesizer = Synthesizer(cache_size=1, workers=1)
        grid = Grid.from_config(
            self.scenario.section("grid"), self.scenario.boundary
        )
        first = synthesizer.transitions_for(grid, InputGrid(), 2.0)
        synthesizer.transitions_for(grid, InputGrid(), 1.0)
        assert synthesizer.cached_geometries == 1
        assert synthesizer.transitions_for(grid, InputGrid(), 2.0) is not first

    def test_verbose_summary(self):
        stream = io.StringIO()
        Synthesizer(workers=1, verbosity=1, stream=stream).resynthesize(
            self.scenario
        )
        line = stream.getvalue()
        assert line.startswith("cells=768 winning=")
        assert "synth_ms=" in line

    def test_invalid_solver_arguments(self):
        with pytest.raises(ValueError):
            Synthesizer(chunk_size=0)

    def test_function(self):
        values, controller, elapsed_ms = resynthesize(
            self.scenario, self.synthesizer
        )
        assert elapsed_ms >= 0
        assert controller.values is values


class TestBuildSymbolic:
    def test_reuses_transitions(self, small_scenario):
        symbolic = build_symbolic(small_scenario)
        again = build_symbolic(small_scenario, symbolic.transitions)
        assert again.transitions is symbolic.transitions
        assert again.grid.shape == (8, 6, 16)

    def test_rejects_foreign_transitions(self, small_scenario):
        grid = Grid.from_boundary(Rect(0.0, 2.0, 0.0, 1.5), (0.25, 0.25), 32)
        transitions = TransitionTable(grid, InputGrid(), 2.0)
        with pytest.raises(ValueError):
            build_symbolic(small_scenario, transitions)


@pytest.mark.benchmark
def test_bundled_arena_synthesis_time(scenario, synthesizer, synthesis):
    # Transitions of the bundled geometry are cached by the session fixture.
    result = synthesizer.resynthesize(scenario)
    assert result.elapsed_ms < 2000
    np_testing.assert_array_equal(
        result.values.values, synthesis.values.values
    )


def test_one_obstacle_basin_wins_more(synthesizer, synthesis):
    variant = load_scenario(default_scenario_path("basin_one_obstacle"))
    result = synthesizer.resynthesize(variant)
    assert np.all(result.values.winning[synthesis.values.winning])
    assert result.winning > synthesis.winning
    start = result.controller.grid.quantize(Pose(7.5, 1.0, np.pi))
    assert result.values.values[start] <= synthesis.values.values[start]

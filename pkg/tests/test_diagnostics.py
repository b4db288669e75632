import numpy as np
import pytest

from symdock.abstraction.labels import CellLabel
from symdock.control.allocation import ThrusterLayout
from symdock.synthesis.solver import ReachAvoidSolver
from symdock.synthesis.synthesizer import build_symbolic
from symdock.synthesis.tables import ControllerTable, ValueTable
from symdock.tools import diagnostics


class TestCheckFlow:
    @pytest.mark.parametrize("psi0", [0.0, 0.4, -2.0, np.pi])
    @pytest.mark.parametrize(
        "velocity",
        [(0.2, 0.0, 0.0), (0.1, -0.1, 0.2), (-0.1, 0.1, -0.2), (0.0, 0, 0.1)],
    )
    def test_closed_form_matches_integration(self, psi0, velocity):
        assert diagnostics.check_flow(psi0, velocity, 2.0) < 1e-8

    def test_tiny_yaw_rate(self):
        assert diagnostics.check_flow(0.3, (0.2, 0.1, 1e-9), 2.0) < 1e-8


class TestCheckAllocation:
    def test_within_envelope(self):
        wrenches = np.random.uniform(-1.0, 1.0, size=(50, 3))
        assert diagnostics.check_allocation(ThrusterLayout(), wrenches) == 0

    def test_saturation_warns(self):
        wrenches = [[0.5, 0.0, 0.0], [500.0, 0.0, 0.0]]
        with pytest.warns(RuntimeWarning):
            fraction = diagnostics.check_allocation(ThrusterLayout(), wrenches)
        assert fraction == 0.5


class TestCheckFixedPoint:
    @pytest.fixture(autouse=True)
    def setup(self, small_scenario):
        self.symbolic = build_symbolic(small_scenario)
        self.result = ReachAvoidSolver(workers=1).run(self.symbolic)

    def tampered(self, change):
        controller = self.result.controller
        values = controller.values.values.copy()
        enabled = controller.enabled.copy()
        change(values, enabled)
        table = ValueTable(controller.grid, values, controller.values.labels)
        return ControllerTable(
            controller.grid, controller.inputs, enabled, table
        )

    def first_free_winning_cell(self):
        values = self.result.controller.values
        return tuple(
            np.argwhere(values.winning & (values.labels == CellLabel.FREE))[0]
        )

    def test_solved_controller(self):
        report = diagnostics.check_fixed_point(
            self.symbolic.transitions, self.result.controller
        )
        assert report.checked_cells == self.symbolic.grid.size
        assert report.violations == 0

    def test_detects_wrong_value(self):
        cell = self.first_free_winning_cell()

        def change(values, _):
            values[cell] += 1

        report = diagnostics.check_fixed_point(
            self.symbolic.transitions, self.tampered(change), [cell]
        )
        assert report.checked_cells == 1
        assert report.value_mismatches == 1

    def test_detects_unsafe_input(self):
        cell = self.first_free_winning_cell()
        grid = self.symbolic.grid

        def change(_, enabled):
            enabled[grid.flat_index(cell)] = True

        report = diagnostics.check_fixed_point(
            self.symbolic.transitions, self.tampered(change), [cell]
        )
        assert report.value_mismatches == 0
        assert report.unsafe_inputs > 0


class TestCheckContainment:
    def test_report(self, small_scenario):
        transitions = build_symbolic(small_scenario).transitions
        report = diagnostics.check_containment(
            transitions, pairs=20, samples=50, rng=np.random.default_rng(1)
        )
        assert report.pairs == 20
        assert report.samples == 50
        assert report.violations == 0
        assert report.worst_excess <= 1e-9

    @pytest.mark.parametrize("pairs, samples", [(0, 10), (10, 0)])
    def test_counts(self, small_scenario, pairs, samples):
        transitions = build_symbolic(small_scenario).transitions
        with pytest.raises(ValueError):
            diagnostics.check_containment(transitions, pairs, samples)


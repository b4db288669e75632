import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.abstraction.grid import CellId, Grid, InputGrid
from symdock.abstraction.labels import label_cells
from symdock.abstraction.symbolic import (
    BLOCKED,
    SuccessorBox,
    SymbolicSystem,
    TransitionTable,
    growth_bound,
    nominal_displacement,
    nominal_successor,
    successors,
)
from symdock.core.scenario import Rect
from symdock.dynamics import BodyVelocity, Pose
from symdock.tools.diagnostics import check_containment


BOUNDARY = Rect(0.0, 8.0, 0.0, 6.0)


class TestNominalSuccessor:
    def test_straight_surge(self):
        successor = nominal_successor(
            Pose(1.0, 2.0, 0.0), BodyVelocity(0.2, 0.0, 0.0), 2.0
        )
        np_testing.assert_allclose(successor.to_array(), [1.4, 2.0, 0.0])

    def test_turning(self):
        successor = nominal_successor(
            Pose(0.0, 0.0, 0.0), BodyVelocity(0.2, 0.0, 0.2), 2.0
        )
        np_testing.assert_allclose(
            successor.to_array(), [0.389418, 0.078939, 0.4], atol=1e-6
        )

    def test_closed_form(self):
        for _ in range(100):
            psi0 = np.random.uniform(-np.pi, np.pi)
            u, v = np.random.uniform(-0.1, 0.2), np.random.uniform(-0.1, 0.1)
            r = np.random.choice([-1, 1]) * np.random.uniform(0.05, 0.2)
            tau = 2.0
            psi = psi0 + r * tau
            dx = (u * (np.sin(psi) - np.sin(psi0))
                  - v * (np.cos(psi0) - np.cos(psi))) / r
            dy = (u * (np.cos(psi0) - np.cos(psi))
                  + v * (np.sin(psi) - np.sin(psi0))) / r
            displacement = nominal_displacement(psi0, [u, v, r], tau)
            np_testing.assert_allclose(
                [float(displacement[0]), float(displacement[1])],
                [dx, dy],
                atol=1e-12,
            )

    def test_continuous_at_zero_yaw_rate(self):
        eta = Pose(1.0, 1.0, 0.7)
        straight = nominal_successor(eta, BodyVelocity(0.2, 0.0, 0.0), 2.0)
        turning = nominal_successor(eta, BodyVelocity(0.2, 0.0, 1e-9), 2.0)
        np_testing.assert_allclose(
            turning.to_array(), straight.to_array(), atol=1e-8
        )

    def test_rejects_non_positive_period(self):
        with pytest.raises(ValueError):
            nominal_successor(Pose(0, 0, 0), BodyVelocity.zero(), 0.0)


class TestGrowthBound:
    def test_zero_radius(self):
        np_testing.assert_array_equal(
            growth_bound(np.zeros(3), BodyVelocity(0.2, 0.1, 0.2), 2.0),
            np.zeros(3),
        )

    def test_example(self):
        bound = growth_bound(
            (0.25, 0.25, np.pi / 32), BodyVelocity(0.2, 0.0, 0.2), 2.0
        )
        np_testing.assert_allclose(
            bound, [0.289270, 0.289270, 0.098175], atol=1e-6
        )

    def test_vectorized_inputs(self):
        velocities = InputGrid().values
        bounds = growth_bound((0.25, 0.25, 0.1), velocities, 2.0)
        assert bounds.shape == (60, 3)
        for velocity, bound in zip(velocities, bounds):
            np_testing.assert_allclose(
                bound, growth_bound((0.25, 0.25, 0.1), velocity, 2.0)
            )

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            growth_bound((-0.1, 0.0, 0.0), BodyVelocity.zero(), 2.0)

    def test_soundness(self):
        radius = np.array([0.25, 0.25, np.pi / 32])
        count = 10000
        velocities = np.column_stack(
            [
                np.random.uniform(-0.1, 0.2, size=count),
                np.random.uniform(-0.1, 0.1, size=count),
                np.random.uniform(-0.2, 0.2, size=count),
            ]
        )
        eta = np.column_stack(
            [
                np.random.uniform(0, 8, size=count),
                np.random.uniform(0, 6, size=count),
                np.random.uniform(-np.pi, np.pi, size=count),
            ]
        )
        perturbed = eta + np.random.uniform(-1, 1, size=(count, 3)) * radius
        flow = np.column_stack(
            nominal_displacement(eta[:, 2], velocities, 2.0)
        )
        flow_perturbed = np.column_stack(
            nominal_displacement(perturbed[:, 2], velocities, 2.0)
        )
        deviation = np.abs((perturbed + flow_perturbed) - (eta + flow))
        bound = growth_bound(radius, velocities, 2.0)
        assert np.all(deviation <= bound + 1e-12)


class TestTransitionTable:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.grid = Grid.from_boundary(BOUNDARY, (0.5, 0.5), 32)
        self.inputs = InputGrid()
        self.transitions = TransitionTable(self.grid, self.inputs, 2.0)

    def test_zero_input_keeps_cell(self):
        zero = self.inputs.index_of(BodyVelocity.zero())
        cell = CellId(8, 6, 16)
        box = self.transitions.successors(cell, zero)
        assert isinstance(box, SuccessorBox)
        assert cell in box
        for successor in box:
            assert all(
                abs(a - b) <= 1 for a, b in zip(successor, cell)
            )

    def test_blocked_at_wall(self):
        forward = self.inputs.index_of(BodyVelocity(0.2, 0.0, 0.0))
        assert self.transitions.successors(CellId(15, 5, 16), forward) is (
            BLOCKED
        )
        backward = self.inputs.index_of(BodyVelocity(-0.1, 0.0, 0.0))
        assert isinstance(
            self.transitions.successors(CellId(15, 5, 16), backward),
            SuccessorBox,
        )

    def test_blocked_is_a_singleton(self):
        assert repr(BLOCKED) == "Blocked"
        assert type(BLOCKED)() is BLOCKED

    def test_box_iteration(self):
        for _ in range(50):
            cell = self.grid.cell_from_flat(
                np.random.randint(self.grid.size)
            )
            box = self.transitions.successors(
                cell, np.random.randint(len(self.inputs))
            )
            if box is BLOCKED:
                continue
            cells = list(box)
            assert len(cells) == len(box)
            assert len(set(cells)) == len(cells)
            for successor in cells:
                assert successor in box
                assert 0 <= successor.ipsi < self.grid.counts[2]

    def test_heading_wraps(self):
        turn = self.inputs.index_of(BodyVelocity(0.0, 0.0, 0.2))
        box = self.transitions.successors(CellId(8, 6, 31), turn)
        assert {cell.ipsi for cell in box} == {1, 2}
        assert CellId(8, 6, 1) in box
        assert CellId(8, 6, 31) not in box

    def test_function_accepts_velocity(self):
        cell = CellId(4, 4, 3)
        velocity = BodyVelocity(0.1, -0.1, 0.1)
        assert successors(cell, velocity, self.transitions) == successors(
            cell, self.inputs.index_of(velocity), self.transitions
        )
        with pytest.raises(ValueError):
            successors(CellId(16, 0, 0), 0, self.transitions)

    def test_deterministic(self):
        other = TransitionTable(self.grid, self.inputs, 2.0)
        for _ in range(100):
            cell = self.grid.cell_from_flat(
                np.random.randint(self.grid.size)
            )
            index = np.random.randint(len(self.inputs))
            assert self.transitions.successors(cell, index) == (
                other.successors(cell, index)
            )

    def test_translation_equivariance(self):
        index = self.inputs.index_of(BodyVelocity(0.1, 0.0, 0.1))
        box = self.transitions.successors(CellId(6, 5, 9), index)
        shifted = self.transitions.successors(CellId(8, 6, 9), index)
        assert shifted.lower.ix - box.lower.ix == 2
        assert shifted.upper.iy - box.upper.iy == 1
        assert shifted.lower.ipsi == box.lower.ipsi

    def test_heading_offsets_are_periodic(self):
        offsets = self.transitions.upper_offset[:, :, 2]
        np_testing.assert_array_equal(offsets, offsets[:1].repeat(32, axis=0))

    def test_quarter_turn_symmetry(self):
        # Square cells: turning the heading by a quarter maps the y box of
        # a pair onto the mirrored x box.
        quarter = self.grid.counts[2] // 4
        lower = self.transitions.relative_lower
        upper = self.transitions.relative_upper
        np_testing.assert_allclose(
            lower[quarter:, :, 0] - 0.5,
            -(upper[:-quarter, :, 1] - 0.5),
            atol=1e-12,
        )

    def test_layout_matches_successors(self):
        layout = self.transitions.layout
        assert layout.index.shape == (self.grid.size, len(self.inputs))
        for _ in range(500):
            flat = np.random.randint(self.grid.size)
            index = np.random.randint(len(self.inputs))
            box = self.transitions.successors(
                self.grid.cell_from_flat(flat), index
            )
            assert layout.blocked[flat, index] == (box is BLOCKED)

    def test_containment(self):
        report = check_containment(
            self.transitions,
            pairs=500,
            samples=1000,
            rng=np.random.default_rng(0),
        )
        assert report.pairs == 500
        assert report.violations == 0

    def test_reduced_growth_is_detected(self):
        unsound = TransitionTable(
            self.grid, self.inputs, 2.0, growth_scale=0.5
        )
        report = check_containment(
            unsound, pairs=500, samples=1000, rng=np.random.default_rng(0)
        )
        assert report.violations > 0

    def test_rejects_non_positive_period(self):
        with pytest.raises(ValueError):
            TransitionTable(self.grid, self.inputs, 0.0)


class TestSymbolicSystem:
    def test_consistency_checks(self, scenario):
        grid = Grid.from_boundary(BOUNDARY, (0.5, 0.5), 32)
        inputs = InputGrid()
        transitions = TransitionTable(grid, inputs, 2.0)
        labels = label_cells(grid, scenario)
        system = SymbolicSystem(grid, inputs, labels, transitions)
        assert system.tau_s == 2.0
        cell = CellId(8, 6, 16)
        assert system.successors(cell, 7) == transitions.successors(cell, 7)
        with pytest.raises(ValueError):
            SymbolicSystem(grid, inputs, labels[:-1], transitions)
        other = Grid.from_boundary(BOUNDARY, (0.5, 0.5), 16)
        with pytest.raises(ValueError):
            SymbolicSystem(
                other, inputs, label_cells(other, scenario), transitions
            )

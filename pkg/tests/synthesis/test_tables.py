import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.abstraction.grid import Grid, InputGrid
from symdock.abstraction.labels import CellLabel
from symdock.dynamics import BodyVelocity, Pose
from symdock.exceptions import OutOfDomain
from symdock.synthesis.export import (
    COLUMNS,
    read_controller_csv,
    write_controller_csv,
)
from symdock.synthesis.tables import (
    AT_TARGET,
    NOT_WINNING,
    UNREACHABLE,
    ControllerTable,
    ValueTable,
    safe_actions,
)


class TestSafeActions:
    @pytest.fixture(autouse=True)
    def setup(self, synthesis):
        self.controller = synthesis.controller
        self.grid = synthesis.controller.grid

    def test_at_target(self):
        labels = self.controller.values.labels
        cell = tuple(np.argwhere(labels == CellLabel.TARGET)[0])
        pose = self.grid.cell_center(cell)
        assert safe_actions(self.controller, self.grid, pose) is AT_TARGET

    def test_inside_obstacle(self):
        pose = Pose(4.9, 1.5, np.pi / 2)
        assert safe_actions(self.controller, self.grid, pose) is NOT_WINNING

    def test_docking_start(self):
        actions = safe_actions(
            self.controller, self.grid, Pose(7.5, 1.0, np.pi)
        )
        assert isinstance(actions, list)
        assert actions
        assert all(isinstance(action, BodyVelocity) for action in actions)

    def test_actions_follow_input_order(self):
        winning = np.argwhere(
            self.controller.values.winning
            & (self.controller.values.labels != CellLabel.TARGET)
        )
        cell = tuple(winning[len(winning) // 2])
        indices = self.controller.input_indices(cell)
        assert indices == sorted(indices)
        actions = safe_actions(
            self.controller, self.grid, self.grid.cell_center(cell)
        )
        assert actions == [self.controller.inputs.velocity(i) for i in indices]

    def test_outside_grid(self):
        with pytest.raises(OutOfDomain):
            safe_actions(self.controller, self.grid, Pose(8.5, 1.0, 0.0))

    def test_status_repr(self):
        assert repr(AT_TARGET) == "ActionStatus.AT_TARGET"
        assert NOT_WINNING.value == "not_winning"


class TestTables:
    @pytest.fixture(autouse=True)
    def setup(self, small_scenario):
        self.grid = Grid.from_config(
            small_scenario.section("grid"), small_scenario.boundary
        )

    def test_value_table_shape(self):
        with pytest.raises(ValueError):
            ValueTable(
                grid=self.grid,
                values=np.zeros((2, 2, 2), dtype=np.int32),
                labels=np.zeros(self.grid.shape, dtype=np.uint8),
            )

    def test_value_lookup(self):
        values = np.full(self.grid.shape, UNREACHABLE, dtype=np.int32)
        values[0, 0, 0] = 0
        values[1, 0, 0] = 3
        labels = np.zeros(self.grid.shape, dtype=np.uint8)
        labels[0, 0, 0] = CellLabel.TARGET
        table = ValueTable(grid=self.grid, values=values, labels=labels)
        assert table.value((0, 0, 0)) == 0
        assert table.value((1, 0, 0)) == 3
        assert table.value((2, 0, 0)) is None
        assert table.winning_count == 2
        assert table.is_target((0, 0, 0))
        assert not table.is_target((1, 0, 0))
        assert table.is_winning((1, 0, 0))

    def test_controller_bitmask(self, synthesis):
        controller = synthesis.controller
        cell = tuple(np.argwhere(controller.counts() > 0)[0])
        mask = controller.bitmask(cell)
        indices = controller.input_indices(cell)
        assert mask == sum(2**index for index in indices)
        assert bin(mask).count("1") == controller.counts()[cell]

    def test_controller_shape(self):
        values = ValueTable(
            grid=self.grid,
            values=np.zeros(self.grid.shape, dtype=np.int32),
            labels=np.zeros(self.grid.shape, dtype=np.uint8),
        )
        with pytest.raises(ValueError):
            ControllerTable(
                grid=self.grid,
                inputs=InputGrid(),
                enabled=np.zeros((self.grid.size, 3), dtype=bool),
                values=values,
            )


class TestExport:
    def test_round_trip(self, synthesis, tmp_path):
        path = str(tmp_path / "controller.csv")
        write_controller_csv(path, synthesis.controller)
        restored = read_controller_csv(path)
        assert restored.grid == synthesis.controller.grid
        assert restored.inputs == synthesis.controller.inputs
        np_testing.assert_array_equal(
            restored.values.values, synthesis.values.values
        )
        np_testing.assert_array_equal(
            restored.enabled, synthesis.controller.enabled
        )
        np_testing.assert_array_equal(
            restored.values.winning & (restored.values.values == 0),
            synthesis.values.labels == CellLabel.TARGET,
        )

    def test_layout(self, synthesis, tmp_path):
        path = tmp_path / "controller.csv"
        write_controller_csv(str(path), synthesis.controller)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "# symdock controller"
        assert lines[1].startswith("# grid ")
        assert lines[2].startswith("# inputs ")
        assert tuple(lines[3].split(",")) == COLUMNS
        assert len(lines) == 4 + synthesis.winning
        assert not list(tmp_path.glob("*.tmp"))

    def test_rejects_other_files(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("cell_ix,cell_iy\n1,2\n")
        with pytest.raises(ValueError):
            read_controller_csv(str(path))

    def test_rejects_missing_header(self, tmp_path):
        path = tmp_path / "truncated.csv"
        path.write_text("# symdock controller\n" + ",".join(COLUMNS) + "\n")
        with pytest.raises(ValueError):
            read_controller_csv(str(path))

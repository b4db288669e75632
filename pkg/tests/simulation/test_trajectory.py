import os

import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.simulation.trajectory import COLUMNS, Trajectory


def make_data(rows=5):
    data = np.random.uniform(-1.0, 1.0, size=(rows, len(COLUMNS)))
    data[:, 0] = 0.01 * np.arange(rows)
    data[:, -1] = np.arange(rows) // 2
    return data


class TestTrajectory:
    def test_empty(self):
        traj = Trajectory()
        assert len(traj) == 0
        assert traj.poses.shape == (0, 3)

    def test_views(self):
        data = make_data()
        traj = Trajectory(data)
        np_testing.assert_array_equal(traj.t, data[:, 0])
        np_testing.assert_array_equal(traj.poses, data[:, 1:4])
        np_testing.assert_array_equal(traj.velocities, data[:, 4:7])
        np_testing.assert_array_equal(traj.references, data[:, 7:10])
        np_testing.assert_array_equal(traj.wrenches, data[:, 10:13])
        np_testing.assert_array_equal(traj.epoch_ids, [0, 0, 1, 1, 2])
        np_testing.assert_array_equal(traj.column("tau_n"), data[:, 12])

    @pytest.mark.parametrize("times", [[0.0, 0.0, 0.1], [0.0, 0.2, 0.1]])
    def test_times_must_increase(self, times):
        data = make_data(3)
        data[:, 0] = times
        with pytest.raises(ValueError):
            Trajectory(data)


class TestCsv:
    def test_round_trip(self, tmp_path):
        data = make_data()
        path = str(tmp_path / "trajectory.csv")
        Trajectory(data).to_csv(path)
        with open(path) as handle:
            assert handle.readline().strip() == ",".join(COLUMNS)
        loaded = Trajectory.from_csv(path)
        np_testing.assert_allclose(loaded.data, data, rtol=1e-9)
        assert os.listdir(tmp_path) == ["trajectory.csv"]

    def test_empty_file(self, tmp_path):
        path = str(tmp_path / "empty.csv")
        Trajectory().to_csv(path)
        assert len(Trajectory.from_csv(path)) == 0

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "other.csv"
        path.write_text("t,x,y\n0,1,2\n")
        with pytest.raises(ValueError):
            Trajectory.from_csv(str(path))

import numpy as np
import pytest
from numpy import testing as np_testing

from symdock.control.guidance import berth_velocity
from symdock.dynamics import BodyVelocity, Pose


class TestBerthVelocity:
    def test_proportional_inside_bounds(self):
        nu = berth_velocity(Pose(1.0, 2.0, 0.0), (1.2, 1.9), 0.5)
        np_testing.assert_allclose(nu.to_array(), [0.1, -0.05, 0.0])

    def test_body_frame(self):
        # Facing +y: a goal ahead is surge, a goal to the left is sway.
        nu = berth_velocity(Pose(0.0, 0.0, np.pi / 2), (-0.1, 0.1), 1.0)
        np_testing.assert_allclose(
            nu.to_array(), [0.1, 0.1, 0.0], atol=1e-12
        )

    def test_saturation_keeps_direction(self):
        nu = berth_velocity(Pose(0.0, 0.0, 0.0), (2.0, 1.0), 1.0)
        np_testing.assert_allclose(nu.to_array(), [0.2, 0.1, 0.0])
        nu = berth_velocity(Pose(0.0, 0.0, 0.0), (-1.0, -4.0), 1.0)
        np_testing.assert_allclose(nu.to_array(), [-0.025, -0.1, 0.0])

    def test_at_goal(self):
        nu = berth_velocity(Pose(0.75, 4.5, 1.0), (0.75, 4.5), 0.5)
        assert nu == BodyVelocity.zero()

    def test_zero_gain_rests(self):
        nu = berth_velocity(Pose(0.0, 0.0, 0.3), (1.0, 1.0), 0.0)
        assert nu == BodyVelocity.zero()

    def test_negative_gain(self):
        with pytest.raises(ValueError):
            berth_velocity(Pose(0.0, 0.0, 0.0), (1.0, 0.0), -1.0)

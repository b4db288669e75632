import numpy as np
import pytest
from numpy import testing as np_testing
from scipy.integrate import solve_ivp

from symdock.dynamics import (
    BodyVelocity,
    Pose,
    VesselParams,
    Wrench,
    coriolis_matrix,
    damping_wrench,
    discrete_step,
    euler_step,
    kinetics,
    rotation_matrix,
    wrap_angle,
)


class TestValueTypes:
    def test_pose_wraps_heading(self):
        pose = Pose(1.0, 2.0, 3 * np.pi / 2)
        np_testing.assert_allclose(pose.psi, -np.pi / 2)

    def test_pose_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Pose(np.nan, 0.0, 0.0)
        with pytest.raises(ValueError):
            BodyVelocity(0.0, np.inf, 0.0)
        with pytest.raises(ValueError):
            Wrench(0.0, 0.0, -np.inf)

    def test_array_conversion(self):
        values = np.array([0.1, -0.2, 0.3])
        np_testing.assert_array_equal(
            BodyVelocity.from_array(values).to_array(), values
        )
        np_testing.assert_array_equal(
            Wrench.from_array(values).to_array(), values
        )
        assert BodyVelocity.zero() == BodyVelocity(0, 0, 0)


class TestVesselParams:
    def test_defaults(self):
        params = VesselParams()
        np_testing.assert_array_equal(
            params.inertia, np.diag([20.0, 25.0, 2.5])
        )
        assert params.length == 1.0
        assert params.beam == 0.3

    def test_diagonals_expand(self):
        params = VesselParams(inertia=[10.0, 12.0, 1.0])
        np_testing.assert_array_equal(
            params.inertia, np.diag([10.0, 12.0, 1.0])
        )

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"inertia": [[1, 2, 0], [0, 1, 0], [0, 0, 1]]},
            {"inertia": [1.0, -1.0, 1.0]},
            {"linear_damping": [1.0, -0.1, 1.0]},
            {"length": 0.0},
            {"beam": -0.3},
            {"inertia": np.eye(2)},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            VesselParams(**kwargs)

    def test_config_round_trip(self):
        params = VesselParams(
            inertia=[30.0, 35.0, 3.0], bias=Wrench(0.1, 0.0, 0.0)
        )
        restored = VesselParams.from_config(params.to_config())
        np_testing.assert_array_equal(restored.inertia, params.inertia)
        assert restored.bias == params.bias


class TestRotationMatrix:
    def test_identity(self):
        np_testing.assert_array_equal(rotation_matrix(0.0), np.eye(3))

    def test_quarter_turn(self):
        np_testing.assert_allclose(
            rotation_matrix(np.pi / 2) @ [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            atol=1e-15,
        )

    def test_turning_surge(self):
        np_testing.assert_allclose(
            rotation_matrix(0.4) @ [0.2, 0.0, 0.2],
            [0.184212, 0.077884, 0.2],
            atol=1e-6,
        )

    def test_orthogonal(self):
        for psi in np.random.uniform(-10, 10, size=1000):
            R = rotation_matrix(psi)
            np_testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)
            np_testing.assert_allclose(np.linalg.det(R), 1.0)


class TestKinetics:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.params = VesselParams()

    def test_coriolis_at_rest(self):
        np_testing.assert_array_equal(
            coriolis_matrix(BodyVelocity.zero(), self.params),
            np.zeros((3, 3)),
        )

    def test_coriolis_surge(self):
        C = coriolis_matrix(BodyVelocity(1.0, 0.0, 0.0), self.params)
        expected = np.zeros((3, 3))
        expected[1, 2] = 20.0
        expected[2, 1] = -20.0
        np_testing.assert_array_equal(C, expected)

    def test_coriolis_skew_and_power_neutral(self):
        for _ in range(100):
            nu = np.random.uniform(-1, 1, size=3)
            C = coriolis_matrix(nu, self.params)
            np_testing.assert_allclose(C + C.T, np.zeros((3, 3)))
            np_testing.assert_allclose(nu @ C @ nu, 0.0, atol=1e-15)

    def test_damping(self):
        assert damping_wrench(BodyVelocity.zero(), self.params) == (
            Wrench.zero()
        )
        wrench = damping_wrench(BodyVelocity(0.2, 0.0, 0.0), self.params)
        np_testing.assert_allclose(wrench.fx, 0.8)
        assert wrench.fy == 0.0
        assert wrench.mz == 0.0

    @pytest.mark.parametrize("u", [-0.3, -0.01, 0.05, 0.4])
    def test_damping_opposes_motion(self, u):
        wrench = damping_wrench(BodyVelocity(u, 0.0, 0.0), self.params)
        assert np.sign(wrench.fx) == np.sign(u)

    def test_kinetics_at_rest(self):
        np_testing.assert_allclose(
            kinetics(np.zeros(3), np.array([2.0, 0.0, 0.0]), self.params),
            [0.1, 0.0, 0.0],
        )


class TestEulerStep:
    @pytest.fixture(autouse=True)
    def setup(self):
        self.params = VesselParams()

    def test_straight_surge(self):
        params = VesselParams(bias=Wrench(0.3, 0.0, 0.0))
        nu = BodyVelocity(0.2, 0.0, 0.0)
        drag = damping_wrench(nu, params).to_array()
        tau = Wrench.from_array(drag - params.bias.to_array())
        eta, nu_next = euler_step(Pose(0, 0, 0), nu, tau, params, 0.1)
        np_testing.assert_allclose(eta.to_array(), [0.02, 0.0, 0.0])
        np_testing.assert_allclose(nu_next.to_array(), nu.to_array())

    def test_acceleration_from_rest(self):
        _, nu = euler_step(
            Pose(0, 0, 0),
            BodyVelocity.zero(),
            Wrench(2.0, 0.0, 0.0),
            self.params,
            0.01,
        )
        np_testing.assert_allclose(nu.to_array(), [0.001, 0.0, 0.0])

    def test_heading_wraps(self):
        eta, _ = euler_step(
            Pose(0, 0, np.pi - 0.01),
            BodyVelocity(0.0, 0.0, 0.2),
            Wrench.zero(),
            self.params,
            0.1,
        )
        np_testing.assert_allclose(eta.psi, -np.pi + 0.01)

    def test_rejects_non_positive_step(self):
        with pytest.raises(ValueError):
            euler_step(
                Pose(0, 0, 0),
                BodyVelocity.zero(),
                Wrench.zero(),
                self.params,
                0.0,
            )

    def test_discrete_step_leaves_heading_unwrapped(self):
        state = np.array([0.0, 0.0, np.pi - 0.01, 0.0, 0.0, 0.2])
        np_testing.assert_allclose(
            discrete_step(state, np.zeros(3), self.params, 0.1)[2],
            np.pi + 0.01,
        )

    def test_energy_is_dissipated(self):
        M = self.params.inertia
        for _ in range(200):
            nu = np.random.normal(size=3)
            nu *= np.random.uniform(0, 1) / np.linalg.norm(nu)
            state = np.concatenate([np.zeros(3), nu])
            following = discrete_step(state, np.zeros(3), self.params, 0.01)
            before = 0.5 * nu @ M @ nu
            after = 0.5 * following[3:] @ M @ following[3:]
            assert after <= before + 1e-15

    def test_first_order_convergence(self):
        tau = np.array([1.5, -0.5, 0.1])
        initial = np.array([1.0, 2.0, 0.3, 0.1, 0.05, 0.1])
        horizon = 1.0

        def rates(_, state):
            eta_dot = rotation_matrix(state[2]) @ state[3:]
            return np.concatenate(
                [eta_dot, kinetics(state[3:], tau, self.params)]
            )

        reference = solve_ivp(
            rates, (0.0, horizon), initial, method="RK45", rtol=1e-11,
            atol=1e-12,
        ).y[:, -1]

        def integrate(dt):
            state = initial.copy()
            for _ in range(int(round(horizon / dt))):
                state = discrete_step(state, tau, self.params, dt)
            return np.linalg.norm(state - reference)

        coarse = integrate(0.01)
        fine = integrate(0.001)
        assert coarse < 1e-2
        np_testing.assert_allclose(coarse / fine, 10.0, rtol=0.2)


class TestWrapAngle:
    @pytest.mark.parametrize(
        "angle, expected",
        [
            (0.0, 0.0),
            (np.pi, -np.pi),
            (3 * np.pi / 2, -np.pi / 2),
            (-np.pi, -np.pi),
            (2 * np.pi + 0.1, 0.1),
        ],
    )
    def test_examples(self, angle, expected):
        np_testing.assert_allclose(wrap_angle(angle), expected, atol=1e-12)

    def test_range(self):
        angles = np.random.uniform(-100, 100, size=1000)
        wrapped = wrap_angle(angles)
        assert np.all(wrapped >= -np.pi)
        assert np.all(wrapped < np.pi)
        np_testing.assert_allclose(
            np.cos(wrapped), np.cos(angles), atol=1e-9
        )

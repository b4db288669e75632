"""Extended Kalman filter on the discrete vessel model.

The state is ``[x, y, psi, u, v, r]``; the prediction uses the forward Euler
map of :func:`symdock.dynamics.discrete_step` and the measurement is the
pose. Covariances are updated in Joseph form.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.stats

from symdock.dynamics import (
    BodyVelocity,
    Pose,
    VesselParams,
    Wrench,
    discrete_step,
    rotation_matrix,
    wrap_angle,
)


@dataclass(frozen=True)
class ObserverConfig:
    """Noise model of the filter and of the simulated pose sensor.

    Args:
        sigma_position: Standard deviation of measured positions (m).
        sigma_heading: Standard deviation of measured headings (rad).
        process_noise: Diagonal of the per-step process noise covariance.
        initial_covariance: Diagonal of the initial state covariance.
        measurement_period: Time between pose measurements (s).
    """

    sigma_position: float = 0.005
    sigma_heading: float = np.deg2rad(0.2)
    process_noise: Tuple[float, ...] = (1e-8,) * 3 + (1e-5,) * 3
    initial_covariance: Tuple[float, ...] = (1e-4,) * 6
    measurement_period: float = 0.01

    def __post_init__(self):
        if self.sigma_position <= 0 or self.sigma_heading <= 0:
            raise ValueError(
                "Measurement noise must be positive, got "
                f"sigma_position={self.sigma_position}, "
                f"sigma_heading={self.sigma_heading}"
            )
        for name in ("process_noise", "initial_covariance"):
            values = tuple(float(value) for value in getattr(self, name))
            if len(values) != 6 or min(values) < 0:
                raise ValueError(
                    f"{name} needs 6 non-negative entries, got {values}"
                )
            object.__setattr__(self, name, values)
        if self.measurement_period <= 0:
            raise ValueError(
                "The measurement period must be positive, got "
                f"{self.measurement_period}"
            )

    @classmethod
    def from_config(cls, config: Mapping) -> "ObserverConfig":
        """Build the noise model from the ``observer`` section."""
        defaults = cls()
        sigma_heading = defaults.sigma_heading
        if "sigma_heading_deg" in config:
            sigma_heading = np.deg2rad(float(config["sigma_heading_deg"]))
        return cls(
            sigma_position=float(
                config.get("sigma_position", defaults.sigma_position)
            ),
            sigma_heading=float(sigma_heading),
            process_noise=config.get("process_noise", defaults.process_noise),
            initial_covariance=config.get(
                "initial_covariance", defaults.initial_covariance
            ),
            measurement_period=float(
                config.get("measurement_period", defaults.measurement_period)
            ),
        )

    @property
    def measurement_covariance(self) -> np.ndarray:
        return np.diag(
            [
                self.sigma_position**2,
                self.sigma_position**2,
                self.sigma_heading**2,
            ]
        )

    @property
    def process_covariance(self) -> np.ndarray:
        return np.diag(self.process_noise)


@dataclass(frozen=True, eq=False)
class EkfState:
    """Mean and covariance of the filter.

    Attributes:
        mean: ``[x, y, psi, u, v, r]`` with the heading wrapped.
        covariance: Symmetric positive semi-definite ``6 x 6`` matrix.
        nis: Normalized innovation squared of the update that produced this
            state, if any.
    """

    mean: np.ndarray
    covariance: np.ndarray
    nis: Optional[float] = field(default=None)

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(6)
        covariance = np.array(self.covariance, dtype=float)
        if covariance.shape != (6, 6):
            raise ValueError(
                f"The covariance must be 6x6, got shape {covariance.shape}"
            )
        if not np.allclose(covariance, covariance.T, atol=1e-12):
            raise ValueError("The covariance must be symmetric")
        mean[2] = wrap_angle(mean[2])
        object.__setattr__(self, "mean", mean)
        object.__setattr__(
            self, "covariance", 0.5 * (covariance + covariance.T)
        )

    @classmethod
    def from_estimate(
        cls, eta: Pose, nu: BodyVelocity, covariance
    ) -> "EkfState":
        covariance = np.asarray(covariance, dtype=float)
        if covariance.ndim == 1:
            covariance = np.diag(covariance)
        return cls(np.concatenate([eta.to_array(), nu.to_array()]), covariance)

    @property
    def pose(self) -> Pose:
        return Pose.from_array(self.mean[:3])

    @property
    def velocity(self) -> BodyVelocity:
        return BodyVelocity.from_array(self.mean[3:])


def jacobian(
    state: np.ndarray, params: VesselParams, dt: float
) -> np.ndarray:
    """Jacobian of :func:`symdock.dynamics.discrete_step` in the state."""
    psi = state[2]
    u, v, r = state[3:]
    m11, m22 = params.inertia[0, 0], params.inertia[1, 1]
    c, s = np.cos(psi), np.sin(psi)

    F = np.eye(6)
    F[0, 2] += dt * (-s * u - c * v)
    F[1, 2] += dt * (c * u - s * v)
    F[:3, 3:] = dt * rotation_matrix(psi)

    # Derivative of C(nu) nu for the diagonal-mass Coriolis form.
    coriolis = np.array(
        [
            [0.0, -m22 * r, -m22 * v],
            [m11 * r, 0.0, m11 * u],
            [(m22 - m11) * v, (m22 - m11) * u, 0.0],
        ]
    )
    damping = params.linear_damping + params.quadratic_damping @ np.diag(
        2 * np.abs(state[3:])
    )
    F[3:, 3:] += -dt * params.inertia_inverse @ (coriolis + damping)
    return F


def ekf_predict(
    state: EkfState,
    tau_cmd: Wrench,
    params: VesselParams,
    dt: float,
    process_noise=None,
) -> EkfState:
    """Propagate the mean through the discrete model and the covariance
    through its Jacobian.

    Args:
        state: Current estimate.
        tau_cmd: Wrench applied over the step.
        params: Vessel model.
        dt: Step length.
        process_noise: ``6 x 6`` covariance (or diagonal) added per step;
            zero if omitted.
    """
    if dt <= 0:
        raise ValueError(f"The time step must be positive, got {dt}")
    F = jacobian(state.mean, params, dt)
    mean = discrete_step(state.mean, tau_cmd.to_array(), params, dt)
    covariance = F @ state.covariance @ F.T
    if process_noise is not None:
        process_noise = np.asarray(process_noise, dtype=float)
        if process_noise.ndim == 1:
            process_noise = np.diag(process_noise)
        covariance = covariance + process_noise
    return EkfState(mean, covariance)


def ekf_update(state: EkfState, meas: Pose, R_meas) -> EkfState:
    """Correct the estimate with a pose measurement.

    The heading innovation is wrapped into ``[-pi, pi)``. The returned
    state carries the normalized innovation squared in ``nis``.
    """
    R_meas = np.asarray(R_meas, dtype=float)
    H = np.hstack([np.eye(3), np.zeros((3, 3))])
    innovation = meas.to_array() - state.mean[:3]
    innovation[2] = wrap_angle(innovation[2])
    P = state.covariance
    S = H @ P @ H.T + R_meas
    factor = scipy.linalg.cho_factor(S)
    gain = scipy.linalg.cho_solve(factor, H @ P).T
    nis = float(innovation @ scipy.linalg.cho_solve(factor, innovation))
    mean = state.mean + gain @ innovation
    joseph = np.eye(6) - gain @ H
    covariance = joseph @ P @ joseph.T + gain @ R_meas @ gain.T
    return EkfState(mean, covariance, nis=nis)


def nis_consistency(
    nis: Sequence[float], dof: int = 3, confidence: float = 0.95
) -> float:
    """Fraction of NIS values inside the two-sided chi-square interval."""
    nis = np.asarray(nis, dtype=float)
    if nis.size == 0:
        raise ValueError("No NIS values given")
    tail = 0.5 * (1 - confidence)
    lower = scipy.stats.chi2.ppf(tail, dof)
    upper = scipy.stats.chi2.ppf(1 - tail, dof)
    return float(np.mean((nis >= lower) & (nis <= upper)))


class ExtendedKalmanFilter:
    """Filter object owned by one closed-loop run.

    Args:
        params: Vessel model used for prediction.
        config: Noise model.
    """

    def __init__(self, params: VesselParams, config: ObserverConfig):
        self.params = params
        self.config = config
        self.state = None

    def reset(self, eta: Pose, nu: BodyVelocity):
        self.state = EkfState.from_estimate(
            eta, nu, self.config.initial_covariance
        )

    def predict(self, tau_cmd: Wrench, dt: float) -> EkfState:
        self.state = ekf_predict(
            self.state,
            tau_cmd,
            self.params,
            dt,
            self.config.process_covariance,
        )
        return self.state

    def update(self, meas: Pose) -> EkfState:
        self.state = ekf_update(
            self.state, meas, self.config.measurement_covariance
        )
        return self.state

    def measure(self, eta: Pose, rng: np.random.Generator) -> Pose:
        """Noisy pose reading of the simulated sensor."""
        noise = rng.normal(size=3) * np.array(
            [
                self.config.sigma_position,
                self.config.sigma_position,
                self.config.sigma_heading,
            ]
        )
        return Pose.from_array(eta.to_array() + noise)

"""MIMO velocity PID with a clamped integral term."""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np

from symdock.dynamics import BodyVelocity, Wrench


def _diagonal(name, values, *, positive=False):
    values = np.asarray(values, dtype=float)
    if values.shape == (3, 3):
        values = np.diag(values)
    if values.shape != (3,):
        raise ValueError(
            f"{name} must be a diagonal of length 3 or a 3x3 matrix, got "
            f"shape {values.shape}"
        )
    if np.any(values <= 0 if positive else values < 0):
        raise ValueError(
            f"{name} must be {'positive' if positive else 'non-negative'}, "
            f"got {values}"
        )
    return tuple(float(value) for value in values)


@dataclass(frozen=True)
class PidGains:
    """Diagonal PID gains per body axis.

    Args:
        kp: Proportional gains ``(surge, sway, yaw)``.
        ki: Integral gains.
        kd: Derivative gains.
        integral_limit: Per-axis bound on the integral term in N, N, N m.
    """

    kp: Tuple[float, float, float] = (200.0, 250.0, 30.0)
    ki: Tuple[float, float, float] = (50.0, 60.0, 10.0)
    kd: Tuple[float, float, float] = (2.0, 2.0, 0.2)
    integral_limit: Tuple[float, float, float] = (20.0, 20.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, "kp", _diagonal("Kp", self.kp))
        object.__setattr__(self, "ki", _diagonal("Ki", self.ki))
        object.__setattr__(self, "kd", _diagonal("Kd", self.kd))
        object.__setattr__(
            self,
            "integral_limit",
            _diagonal("integral_limit", self.integral_limit, positive=True),
        )

    @classmethod
    def from_config(cls, config: Mapping) -> "PidGains":
        """Build gains from the ``control`` section of a scenario."""
        defaults = cls()
        return cls(
            kp=config.get("Kp", defaults.kp),
            ki=config.get("Ki", defaults.ki),
            kd=config.get("Kd", defaults.kd),
            integral_limit=config.get(
                "integral_limit", defaults.integral_limit
            ),
        )

    @property
    def Kp(self) -> np.ndarray:
        return np.diag(self.kp)

    @property
    def Ki(self) -> np.ndarray:
        return np.diag(self.ki)

    @property
    def Kd(self) -> np.ndarray:
        return np.diag(self.kd)


@dataclass
class PidState:
    """Integral term (in force units) and last measured velocity."""

    integral: np.ndarray = field(default_factory=lambda: np.zeros(3))
    previous: Optional[np.ndarray] = None

    def reset(self):
        self.integral = np.zeros(3)
        self.previous = None


def pid_step(
    nu_ref: BodyVelocity,
    nu_hat: BodyVelocity,
    gains: PidGains,
    dt: float,
    ctrl_state: PidState,
) -> Wrench:
    """One PID update; ``ctrl_state`` is advanced in place.

    The derivative acts on the measured velocity, so reference steps at
    epoch boundaries do not kick the output. A fresh state has no previous
    measurement and contributes no derivative term.
    """
    if dt <= 0:
        raise ValueError(f"The time step must be positive, got {dt}")
    measured = nu_hat.to_array()
    error = nu_ref.to_array() - measured
    limit = np.asarray(gains.integral_limit)
    ctrl_state.integral = np.clip(
        ctrl_state.integral + np.asarray(gains.ki) * error * dt, -limit, limit
    )
    if ctrl_state.previous is None:
        derivative = np.zeros(3)
    else:
        derivative = -(measured - ctrl_state.previous) / dt
    ctrl_state.previous = measured
    command = (
        np.asarray(gains.kp) * error
        + ctrl_state.integral
        + np.asarray(gains.kd) * derivative
    )
    return Wrench.from_array(command)


class VelocityPid:
    """PID velocity controller with optional bias feedforward.

    Args:
        gains: Controller gains.
        bias: Known constant load; when given it is subtracted from every
            command.
    """

    def __init__(self, gains: PidGains, bias: Optional[Wrench] = None):
        self.gains = gains
        self.bias = bias
        self.state = PidState()

    def reset(self):
        self.state.reset()

    def __call__(
        self, nu_ref: BodyVelocity, nu_hat: BodyVelocity, dt: float
    ) -> Wrench:
        command = pid_step(nu_ref, nu_hat, self.gains, dt, self.state)
        if self.bias is None:
            return command
        return Wrench.from_array(command.to_array() - self.bias.to_array())

"""Three degree-of-freedom surface vessel model.

The vessel pose ``eta = (x, y, psi)`` lives in the world frame and the
velocity ``nu = (u, v, r)`` in the body frame.
They are related by the planar kinematics ``eta_dot = R(psi) nu`` and driven
by the rigid-body kinetics

.. math::

    M \\dot\\nu + C(\\nu) \\nu + D(\\nu) \\nu = \\tau + b,

which :func:`euler_step` integrates with the forward Euler method.
All functions are pure and operate on immutable value types, with array
counterparts (:func:`kinetics`, :func:`discrete_step`) for the inner loops of
the simulator and the state observer.
"""

import functools
from dataclasses import dataclass, field
from typing import Mapping, Tuple, Union

import numpy as np

from symdock.tools.multi import multirotation


def wrap_angle(angle):
    """Wrap an angle (or an array of angles) into ``[-pi, pi)``."""
    wrapped = np.mod(np.asarray(angle, dtype=float) + np.pi, 2 * np.pi)
    wrapped = wrapped - np.pi
    # Rounding in np.mod can land exactly on the excluded upper end.
    wrapped = np.where(wrapped >= np.pi, wrapped - 2 * np.pi, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def _check_finite(name, values):
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} must be finite, got {tuple(values)}")


@dataclass(frozen=True)
class Pose:
    """World-frame configuration of the vessel.

    The heading is wrapped into ``[-pi, pi)`` on construction.
    """

    x: float
    y: float
    psi: float

    def __post_init__(self):
        _check_finite("Pose", (self.x, self.y, self.psi))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "psi", wrap_angle(self.psi))

    @classmethod
    def from_array(cls, array) -> "Pose":
        x, y, psi = np.asarray(array, dtype=float).reshape(3)
        return cls(x, y, psi)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi])


@dataclass(frozen=True)
class BodyVelocity:
    """Surge, sway and yaw rate in the body frame."""

    u: float
    v: float
    r: float

    def __post_init__(self):
        _check_finite("BodyVelocity", (self.u, self.v, self.r))
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "r", float(self.r))

    @classmethod
    def zero(cls) -> "BodyVelocity":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, array) -> "BodyVelocity":
        u, v, r = np.asarray(array, dtype=float).reshape(3)
        return cls(u, v, r)

    def to_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.r])


@dataclass(frozen=True)
class Wrench:
    """Body-frame surge force, sway force and yaw moment."""

    fx: float
    fy: float
    mz: float

    def __post_init__(self):
        _check_finite("Wrench", (self.fx, self.fy, self.mz))
        object.__setattr__(self, "fx", float(self.fx))
        object.__setattr__(self, "fy", float(self.fy))
        object.__setattr__(self, "mz", float(self.mz))

    @classmethod
    def zero(cls) -> "Wrench":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, array) -> "Wrench":
        fx, fy, mz = np.asarray(array, dtype=float).reshape(3)
        return cls(fx, fy, mz)

    def to_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.mz])


def _as_matrix(name, value):
    matrix = np.asarray(value, dtype=float)
    if matrix.shape == (3,):
        matrix = np.diag(matrix)
    if matrix.shape != (3, 3):
        raise ValueError(
            f"{name} must be a 3x3 matrix or a diagonal of length 3, got "
            f"shape {matrix.shape}"
        )
    return matrix


@dataclass(frozen=True, eq=False)
class VesselParams:
    """Rigid-body and damping parameters of the vessel.

    Args:
        inertia: Mass and inertia matrix ``M`` (symmetric positive definite).
        linear_damping: Linear damping matrix ``D_lin``.
        quadratic_damping: Quadratic damping matrix ``D_quad``; the damping
            force is ``(D_lin + D_quad diag(|nu|)) nu``.
        bias: Constant slowly varying load ``b``.
        length: Hull length in meters.
        beam: Hull beam in meters.
    """

    inertia: np.ndarray = field(
        default_factory=lambda: np.diag([20.0, 25.0, 2.5])
    )
    linear_damping: np.ndarray = field(
        default_factory=lambda: np.diag([2.0, 7.0, 0.5])
    )
    quadratic_damping: np.ndarray = field(
        default_factory=lambda: np.diag([10.0, 20.0, 1.0])
    )
    bias: Wrench = field(default_factory=Wrench.zero)
    length: float = 1.0
    beam: float = 0.3

    def __post_init__(self):
        inertia = _as_matrix("inertia", self.inertia)
        linear_damping = _as_matrix("linear_damping", self.linear_damping)
        quadratic_damping = _as_matrix(
            "quadratic_damping", self.quadratic_damping
        )
        if not np.allclose(inertia, inertia.T):
            raise ValueError("The inertia matrix must be symmetric")
        try:
            np.linalg.cholesky(inertia)
        except np.linalg.LinAlgError:
            raise ValueError(
                "The inertia matrix must be positive definite"
            ) from None
        for name, matrix in (
            ("linear_damping", linear_damping),
            ("quadratic_damping", quadratic_damping),
        ):
            if np.any(np.diag(matrix) < 0):
                raise ValueError(
                    f"The diagonal of {name} must be non-negative, got "
                    f"{np.diag(matrix)}"
                )
        if self.length <= 0 or self.beam <= 0:
            raise ValueError(
                "Vessel length and beam must be positive, got "
                f"length={self.length}, beam={self.beam}"
            )
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "linear_damping", linear_damping)
        object.__setattr__(self, "quadratic_damping", quadratic_damping)
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "beam", float(self.beam))

    @functools.cached_property
    def inertia_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.inertia)

    @classmethod
    def from_config(cls, config: Mapping) -> "VesselParams":
        """Build parameters from the ``vessel`` section of a scenario."""
        defaults = cls()
        bias = config.get("bias", defaults.bias.to_array())
        return cls(
            inertia=config.get("M", defaults.inertia),
            linear_damping=config.get("D_lin", defaults.linear_damping),
            quadratic_damping=config.get(
                "D_quad", defaults.quadratic_damping
            ),
            bias=Wrench.from_array(bias),
            length=config.get("length", defaults.length),
            beam=config.get("beam", defaults.beam),
        )

    def to_config(self) -> dict:
        return {
            "M": self.inertia.tolist(),
            "D_lin": self.linear_damping.tolist(),
            "D_quad": self.quadratic_damping.tolist(),
            "bias": self.bias.to_array().tolist(),
            "length": self.length,
            "beam": self.beam,
        }


VelocityLike = Union[BodyVelocity, np.ndarray]


def _velocity_array(nu: VelocityLike) -> np.ndarray:
    if isinstance(nu, BodyVelocity):
        return nu.to_array()
    return np.asarray(nu, dtype=float)


def rotation_matrix(psi: float) -> np.ndarray:
    """Rotation from body-frame to world-frame rates for heading ``psi``."""
    return multirotation(psi)


def coriolis_matrix(nu: VelocityLike, params: VesselParams) -> np.ndarray:
    """Skew-symmetric Coriolis and centripetal matrix ``C(nu)``.

    Built from the diagonal of the inertia matrix, so ``nu^T C(nu) nu`` is
    zero and the term does no work.
    """
    u, v, _ = _velocity_array(nu)
    m11 = params.inertia[0, 0]
    m22 = params.inertia[1, 1]
    return np.array(
        [
            [0.0, 0.0, -m22 * v],
            [0.0, 0.0, m11 * u],
            [m22 * v, -m11 * u, 0.0],
        ]
    )


def _damping(nu: np.ndarray, params: VesselParams) -> np.ndarray:
    return (
        params.linear_damping @ nu
        + params.quadratic_damping @ (np.abs(nu) * nu)
    )


def damping_wrench(nu: VelocityLike, params: VesselParams) -> Wrench:
    """Hydrodynamic damping force ``D(nu) nu``."""
    return Wrench.from_array(_damping(_velocity_array(nu), params))


def kinetics(
    nu: np.ndarray, tau: np.ndarray, params: VesselParams
) -> np.ndarray:
    """Body-frame acceleration for velocity ``nu`` under wrench ``tau``."""
    forces = (
        tau
        + params.bias.to_array()
        - coriolis_matrix(nu, params) @ nu
        - _damping(nu, params)
    )
    return params.inertia_inverse @ forces


def discrete_step(
    state: np.ndarray, tau: np.ndarray, params: VesselParams, dt: float
) -> np.ndarray:
    """Forward Euler step of the stacked state ``[eta; nu]``.

    The heading is left unwrapped so that the map stays differentiable; use
    :func:`wrap_angle` on ``state[2]`` afterwards.
    """
    eta, nu = state[:3], state[3:]
    eta_next = eta + dt * rotation_matrix(eta[2]) @ nu
    nu_next = nu + dt * kinetics(nu, tau, params)
    return np.concatenate([eta_next, nu_next])


def euler_step(
    eta: Pose,
    nu: BodyVelocity,
    tau: Wrench,
    params: VesselParams,
    dt: float,
) -> Tuple[Pose, BodyVelocity]:
    """Advance pose and velocity by one forward Euler step of length ``dt``."""
    if dt <= 0:
        raise ValueError(f"The time step must be positive, got {dt}")
    state = discrete_step(
        np.concatenate([eta.to_array(), nu.to_array()]),
        tau.to_array(),
        params,
        dt,
    )
    return Pose.from_array(state[:3]), BodyVelocity.from_array(state[3:])

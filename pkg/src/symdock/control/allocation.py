"""Extended-thrust least-squares allocation.

Each azimuth thruster contributes a free force ``(Fx, Fy)`` at its mount
point, each tunnel thruster a sway force ``Fy`` only. Stacking these into
``f`` gives ``tau = B f`` with one column per force component; the minimum
norm solution ``f = B^+ tau`` is then turned back into magnitudes and
angles. If a magnitude exceeds its limit every thruster is scaled by the
same factor, which keeps the direction of the wrench.
"""

import functools
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from symdock.dynamics import Wrench
from symdock.exceptions import RankDeficientLayout


AZIMUTH = "azimuth"
TUNNEL = "tunnel"


@dataclass(frozen=True)
class Thruster:
    """A thruster mounted at body-frame ``position = (lx, ly)``."""

    name: str
    kind: str
    position: Tuple[float, float]
    max_force: float

    def __post_init__(self):
        if self.kind not in (AZIMUTH, TUNNEL):
            raise ValueError(
                f"Thruster kind must be '{AZIMUTH}' or '{TUNNEL}', got "
                f"{self.kind!r}"
            )
        if self.max_force <= 0:
            raise ValueError(
                f"Thruster {self.name!r} needs a positive force limit, got "
                f"{self.max_force}"
            )
        lx, ly = map(float, self.position)
        object.__setattr__(self, "position", (lx, ly))
        object.__setattr__(self, "max_force", float(self.max_force))

    @property
    def columns(self) -> int:
        return 2 if self.kind == AZIMUTH else 1


@dataclass(frozen=True)
class ThrusterSetpoint:
    """Force magnitude and angle of one thruster.

    Tunnel thrusters report the angle ``+pi/2`` or ``-pi/2`` for a positive
    or negative sway force.
    """

    force: float
    angle: float


def _default_thrusters():
    return (
        Thruster("port", AZIMUTH, (-0.4, 0.15), 30.0),
        Thruster("starboard", AZIMUTH, (-0.4, -0.15), 30.0),
        Thruster("bow", TUNNEL, (0.45, 0.0), 15.0),
    )


@dataclass(frozen=True, eq=False)
class ThrusterLayout:
    """Thrusters of the vessel and their configuration matrix.

    Raises:
        RankDeficientLayout: If the thrusters cannot produce every wrench.
    """

    thrusters: Tuple[Thruster, ...] = ()

    def __post_init__(self):
        thrusters = tuple(self.thrusters) or _default_thrusters()
        object.__setattr__(self, "thrusters", thrusters)
        rank = np.linalg.matrix_rank(self.configuration)
        if rank < 3:
            raise RankDeficientLayout(
                f"The thruster layout spans only {rank} of 3 wrench "
                "directions"
            )

    @classmethod
    def from_config(cls, config: Mapping) -> "ThrusterLayout":
        """Build the layout from the ``thrusters`` section of a scenario."""
        units = config.get("units")
        if not units:
            return cls()
        return cls(
            tuple(
                Thruster(
                    name=unit.get("name", f"thruster{index}"),
                    kind=unit["kind"],
                    position=tuple(unit["position"]),
                    max_force=unit["max_force"],
                )
                for index, unit in enumerate(units)
            )
        )

    @functools.cached_property
    def configuration(self) -> np.ndarray:
        """The ``3 x n`` matrix ``B`` mapping force components to wrenches."""
        columns = []
        for thruster in self.thrusters:
            lx, ly = thruster.position
            if thruster.kind == AZIMUTH:
                columns.append([1.0, 0.0, -ly])
            columns.append([0.0, 1.0, lx])
        return np.array(columns).T

    @functools.cached_property
    def pseudo_inverse(self) -> np.ndarray:
        return np.linalg.pinv(self.configuration)

    def force_components(self, setpoints: Sequence[ThrusterSetpoint]):
        """Stacked force components of ``setpoints``."""
        if len(setpoints) != len(self.thrusters):
            raise ValueError(
                f"Expected {len(self.thrusters)} setpoints, got "
                f"{len(setpoints)}"
            )
        components = []
        for thruster, setpoint in zip(self.thrusters, setpoints):
            if thruster.kind == AZIMUTH:
                components.append(setpoint.force * np.cos(setpoint.angle))
            components.append(setpoint.force * np.sin(setpoint.angle))
        return np.array(components)


def allocation_scale(tau_cmd: Wrench, layout: ThrusterLayout) -> float:
    """Factor applied to the minimum norm solution to respect force limits.

    One when no thruster saturates.
    """
    return _allocate(tau_cmd, layout)[2]


def _allocate(tau_cmd: Wrench, layout: ThrusterLayout):
    components = layout.pseudo_inverse @ tau_cmd.to_array()
    forces = []
    angles = []
    column = 0
    for thruster in layout.thrusters:
        if thruster.kind == AZIMUTH:
            fx, fy = components[column : column + 2]
            forces.append(np.hypot(fx, fy))
            angles.append(np.arctan2(fy, fx))
        else:
            fy = components[column]
            forces.append(abs(fy))
            angles.append(np.copysign(np.pi / 2, fy))
        column += thruster.columns
    forces = np.array(forces)
    limits = np.array([thruster.max_force for thruster in layout.thrusters])
    scale = float(min(1.0, np.min(limits / np.maximum(forces, 1e-300))))
    return forces * scale, angles, scale


def allocate(
    tau_cmd: Wrench, layout: ThrusterLayout
) -> Tuple[ThrusterSetpoint, ...]:
    """Thruster setpoints realizing ``tau_cmd`` with the least total force.

    Commands beyond the thrusters' capability are scaled down uniformly
    until the most loaded thruster is at its limit.
    """
    forces, angles, _ = _allocate(tau_cmd, layout)
    return tuple(
        ThrusterSetpoint(float(force), float(angle))
        for force, angle in zip(forces, angles)
    )


def wrench_from(
    setpoints: Sequence[ThrusterSetpoint], layout: ThrusterLayout
) -> Wrench:
    """Body-frame wrench produced by ``setpoints``."""
    return Wrench.from_array(
        layout.configuration @ layout.force_components(setpoints)
    )

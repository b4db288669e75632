"""Arena geometry, safety margins and ground-truth collision checks."""

import copy
import dataclasses
import functools
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from symdock.dynamics import Pose, VesselParams
from symdock.exceptions import EmptyTarget, InvalidScenario
from symdock.tools.io import atomic_write_text
from symdock.tools.multi import rotate_planar


_TOLERANCE = 1e-9

#: Scenario sections that are parsed by the consuming modules.
CONFIG_SECTIONS = (
    "grid",
    "inputs",
    "weights",
    "control",
    "thrusters",
    "observer",
)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle ``[x_min, x_max] x [y_min, y_max]``."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        values = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Rectangle bounds must be finite, got {values}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(
                f"Rectangle needs x_min < x_max and y_min < y_max, got "
                f"{values}"
            )
        for name, value in zip(("x_min", "x_max", "y_min", "y_max"), values):
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "Rect":
        if len(values) != 4:
            raise ValueError(
                "A rectangle is given as [x_min, x_max, y_min, y_max], got "
                f"{values}"
            )
        return cls(*values)

    def to_list(self):
        return [self.x_min, self.x_max, self.y_min, self.y_max]

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> Tuple[float, float]:
        return (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )

    def contains(self, other: "Rect", tolerance: float = _TOLERANCE) -> bool:
        """Whether ``other`` lies inside this rectangle."""
        return (
            other.x_min >= self.x_min - tolerance
            and other.x_max <= self.x_max + tolerance
            and other.y_min >= self.y_min - tolerance
            and other.y_max <= self.y_max + tolerance
        )

    def contains_point(self, x: float, y: float) -> bool:
        return (
            self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max
        )

    def overlaps(self, other: "Rect") -> bool:
        """Whether the intersection with ``other`` has positive area."""
        return (
            min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
            > _TOLERANCE
            and min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
            > _TOLERANCE
        )

    def translated(self, dx: float, dy: float) -> "Rect":
        return Rect(
            self.x_min + dx, self.x_max + dx, self.y_min + dy, self.y_max + dy
        )


def inflate_obstacle(rect: Rect, margin: float, boundary: Rect) -> Rect:
    """Over-approximate an obstacle by ``margin`` on every free side.

    Sides flush with the boundary stay at the wall and the result is clipped
    to the boundary.
    """
    if margin < 0:
        raise ValueError(f"The margin must be non-negative, got {margin}")

    def grow(value, wall, sign):
        if abs(value - wall) <= _TOLERANCE:
            return value
        return value + sign * margin

    return Rect(
        max(grow(rect.x_min, boundary.x_min, -1), boundary.x_min),
        min(grow(rect.x_max, boundary.x_max, +1), boundary.x_max),
        max(grow(rect.y_min, boundary.y_min, -1), boundary.y_min),
        min(grow(rect.y_max, boundary.y_max, +1), boundary.y_max),
    )


def deflate_target(rect: Rect, margin: float) -> Rect:
    """Under-approximate a target by shrinking every side by ``margin``.

    Raises:
        EmptyTarget: If the shrunk rectangle has no area.
    """
    if margin < 0:
        raise ValueError(f"The margin must be non-negative, got {margin}")
    if 2 * margin >= rect.width or 2 * margin >= rect.height:
        raise EmptyTarget(
            f"Deflating {rect.to_list()} by {margin} leaves an empty target"
        )
    return Rect(
        rect.x_min + margin,
        rect.x_max - margin,
        rect.y_min + margin,
        rect.y_max - margin,
    )


def footprint_corners(poses, length: float, beam: float) -> np.ndarray:
    """Corners of the vessel rectangle for an array of poses.

    Args:
        poses: ``k x 3`` array of ``(x, y, psi)`` rows or a single pose.
        length: Hull length.
        beam: Hull beam.

    Returns:
        A ``k x 4 x 2`` array of world-frame corners (counter-clockwise).
    """
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    half_length, half_beam = 0.5 * length, 0.5 * beam
    body = np.array(
        [
            [half_length, half_beam],
            [-half_length, half_beam],
            [-half_length, -half_beam],
            [half_length, -half_beam],
        ]
    )
    return rotate_planar(poses[:, 2], body) + poses[:, np.newaxis, :2]


def footprint_half_extents(psi, length: float, beam: float):
    """Half widths of the axis-aligned box around a rotated footprint."""
    c, s = np.abs(np.cos(psi)), np.abs(np.sin(psi))
    half_length, half_beam = 0.5 * length, 0.5 * beam
    return half_length * c + half_beam * s, half_length * s + half_beam * c


def footprint_sweep_extents(psi_lower, psi_upper, length: float, beam: float):
    """Largest axis-aligned half extents over a heading interval.

    Each half extent is the maximum of four sinusoids of the heading. Over
    an interval it is attained either at an interval end or at a sinusoid
    peak that falls inside the interval.

    Args:
        psi_lower: Lower interval ends (array).
        psi_upper: Upper interval ends, ``psi_upper >= psi_lower``.
        length: Hull length.
        beam: Hull beam.

    Returns:
        Tuple of arrays ``(ext_x, ext_y)``.
    """
    psi_lower = np.atleast_1d(np.asarray(psi_lower, dtype=float))
    psi_upper = np.atleast_1d(np.asarray(psi_upper, dtype=float))
    lower_x, lower_y = footprint_half_extents(psi_lower, length, beam)
    upper_x, upper_y = footprint_half_extents(psi_upper, length, beam)
    ext_x = np.maximum(lower_x, upper_x)
    ext_y = np.maximum(lower_y, upper_y)
    half_length, half_beam = 0.5 * length, 0.5 * beam
    peak_value = np.hypot(half_length, half_beam)
    phase = np.arctan2(half_beam, half_length)
    # ext_x peaks where psi = +-phase (mod pi), ext_y where psi = pi/2 +-
    # phase (mod pi).
    for offsets, extent in (
        ((phase, -phase), ext_x),
        ((np.pi / 2 - phase, np.pi / 2 + phase), ext_y),
    ):
        for offset in offsets:
            # First peak at or above the lower end.
            peak = offset + np.pi * np.ceil((psi_lower - offset) / np.pi)
            inside = peak <= psi_upper
            extent[inside] = peak_value
    return ext_x, ext_y


def _separated(poses, rect: Rect, length: float, beam: float):
    """Separating-axis test between footprints and an axis-aligned box."""
    x, y, psi = poses[:, 0], poses[:, 1], poses[:, 2]
    c, s = np.cos(psi), np.sin(psi)
    ext_x, ext_y = footprint_half_extents(psi, length, beam)
    separated = (
        (x + ext_x <= rect.x_min + _TOLERANCE)
        | (x - ext_x >= rect.x_max - _TOLERANCE)
        | (y + ext_y <= rect.y_min + _TOLERANCE)
        | (y - ext_y >= rect.y_max - _TOLERANCE)
    )
    center_x = 0.5 * (rect.x_min + rect.x_max) - x
    center_y = 0.5 * (rect.y_min + rect.y_max) - y
    half_w, half_h = 0.5 * rect.width, 0.5 * rect.height
    along = np.abs(center_x * c + center_y * s)
    across = np.abs(-center_x * s + center_y * c)
    reach_along = 0.5 * length + half_w * np.abs(c) + half_h * np.abs(s)
    reach_across = 0.5 * beam + half_w * np.abs(s) + half_h * np.abs(c)
    separated |= along >= reach_along - _TOLERANCE
    separated |= across >= reach_across - _TOLERANCE
    return separated


def footprint_collisions(poses, scenario: "Scenario") -> np.ndarray:
    """Vectorized :func:`footprint_collision` over a ``k x 3`` pose array."""
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    length, beam = scenario.vessel.length, scenario.vessel.beam
    ext_x, ext_y = footprint_half_extents(poses[:, 2], length, beam)
    boundary = scenario.boundary
    collided = (
        (poses[:, 0] - ext_x < boundary.x_min - _TOLERANCE)
        | (poses[:, 0] + ext_x > boundary.x_max + _TOLERANCE)
        | (poses[:, 1] - ext_y < boundary.y_min - _TOLERANCE)
        | (poses[:, 1] + ext_y > boundary.y_max + _TOLERANCE)
    )
    for obstacle in scenario.obstacles:
        collided |= ~_separated(poses, obstacle, length, beam)
    return collided


def footprint_collision(eta: Pose, scenario: "Scenario") -> bool:
    """Whether the vessel rectangle at ``eta`` hits an obstacle or a wall.

    Touching counts as clear; only overlaps with positive area collide.
    """
    return bool(footprint_collisions(eta.to_array(), scenario)[0])


def footprint_within(poses, rect: Rect, length: float, beam: float):
    """Whether each footprint lies entirely inside ``rect``.

    Returns:
        A boolean array with one entry per pose.
    """
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    ext_x, ext_y = footprint_half_extents(poses[:, 2], length, beam)
    return (
        (poses[:, 0] - ext_x >= rect.x_min - _TOLERANCE)
        & (poses[:, 0] + ext_x <= rect.x_max + _TOLERANCE)
        & (poses[:, 1] - ext_y >= rect.y_min - _TOLERANCE)
        & (poses[:, 1] + ext_y <= rect.y_max + _TOLERANCE)
    )


def footprint_clearance(poses, rect: Rect, length: float, beam: float):
    """Distance from each footprint to an axis-aligned rectangle.

    Zero for overlapping footprints.
    For disjoint convex polygons the closest pair always involves a vertex of
    one of them, so the distance is the smaller of the corner-to-box and the
    box-corner-to-footprint distances.
    """
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    corners = footprint_corners(poses, length, beam)
    cx, cy = corners[..., 0], corners[..., 1]
    dx = np.maximum(np.maximum(rect.x_min - cx, cx - rect.x_max), 0.0)
    dy = np.maximum(np.maximum(rect.y_min - cy, cy - rect.y_max), 0.0)
    distance = np.hypot(dx, dy).min(axis=1)

    box_corners = np.array(
        [
            [rect.x_min, rect.y_min],
            [rect.x_max, rect.y_min],
            [rect.x_max, rect.y_max],
            [rect.x_min, rect.y_max],
        ]
    )
    relative = box_corners[np.newaxis] - poses[:, np.newaxis, :2]
    body = rotate_planar(-poses[:, 2], relative)
    bx = np.maximum(np.abs(body[..., 0]) - 0.5 * length, 0.0)
    by = np.maximum(np.abs(body[..., 1]) - 0.5 * beam, 0.0)
    distance = np.minimum(distance, np.hypot(bx, by).min(axis=1))

    overlapping = ~_separated(poses, rect, length, beam)
    return np.where(overlapping, 0.0, distance)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Docking arena: boundary, obstacles, target and vessel.

    Args:
        boundary: Arena boundary ``B``.
        obstacles: Concrete obstacles.
        target: Concrete docking target.
        obstacle_margin: Inflation applied to obstacles for synthesis.
        target_margin: Deflation applied to the target for synthesis.
        vessel: Vessel parameters, including its footprint.
        origin_offset: Coordinates, in this scenario's frame, of the arena
            frame origin. Zero when the scenario is written in arena
            coordinates.
        footprint_clearance: Whether synthesis also rules out cells from
            which the hull could reach a wall or a concrete obstacle.
        target_heading: Optional ``(lo, hi)`` heading interval required at
            the target.
        sampling_period: Synthesis and command period ``tau_s``.
        config: Remaining scenario sections (``grid``, ``inputs``,
            ``weights``, ``control``, ``thrusters``, ``observer``) as plain
            mappings, parsed by the modules that consume them.
    """

    boundary: Rect
    obstacles: Tuple[Rect, ...]
    target: Rect
    obstacle_margin: float = 0.5
    target_margin: float = 0.25
    vessel: VesselParams = field(default_factory=VesselParams)
    origin_offset: Tuple[float, float] = (0.0, 0.0)
    footprint_clearance: bool = True
    target_heading: Optional[Tuple[float, float]] = None
    sampling_period: float = 2.0
    config: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(
            self, "origin_offset", tuple(map(float, self.origin_offset))
        )
        if self.obstacle_margin < 0 or self.target_margin < 0:
            raise InvalidScenario(
                "Margins must be non-negative, got "
                f"obstacle_margin={self.obstacle_margin}, "
                f"target_margin={self.target_margin}"
            )
        for obstacle in self.obstacles:
            if not self.boundary.contains(obstacle):
                raise InvalidScenario(
                    f"Obstacle {obstacle.to_list()} is not inside the "
                    f"boundary {self.boundary.to_list()}"
                )
        if not self.boundary.contains(self.target):
            raise InvalidScenario(
                f"Target {self.target.to_list()} is not inside the boundary "
                f"{self.boundary.to_list()}"
            )
        if self.sampling_period <= 0:
            raise InvalidScenario(
                "The sampling period must be positive, got "
                f"{self.sampling_period}"
            )
        if self.target_heading is not None:
            lower, upper = map(float, self.target_heading)
            if not lower < upper:
                raise InvalidScenario(
                    "The target heading interval needs lo < hi, got "
                    f"{self.target_heading}"
                )
            object.__setattr__(self, "target_heading", (lower, upper))
        deflate_target(self.target, self.target_margin)

    @functools.cached_property
    def inflated_obstacles(self) -> Tuple[Rect, ...]:
        return tuple(
            inflate_obstacle(obstacle, self.obstacle_margin, self.boundary)
            for obstacle in self.obstacles
        )

    @functools.cached_property
    def deflated_target(self) -> Rect:
        return deflate_target(self.target, self.target_margin)

    def section(self, name: str) -> Dict[str, Any]:
        """The raw mapping of a configuration section (empty if absent)."""
        return dict(self.config.get(name, {}))

    def replace(self, **changes) -> "Scenario":
        """Copy of the scenario with some fields replaced."""
        return dataclasses.replace(self, **changes)

    def to_arena(self, x: float, y: float) -> Tuple[float, float]:
        """Convert scenario-frame coordinates into the arena frame."""
        return x - self.origin_offset[0], y - self.origin_offset[1]

    def from_arena(self, x: float, y: float) -> Tuple[float, float]:
        """Convert arena-frame coordinates into the scenario frame."""
        return x + self.origin_offset[0], y + self.origin_offset[1]

    @classmethod
    def from_config(cls, document: Dict[str, Any]) -> "Scenario":
        """Build a scenario from a parsed scenario document.

        Raises:
            InvalidScenario: If required keys are missing or malformed.
        """
        try:
            target_heading = document.get("target_heading")
            return cls(
                boundary=Rect.from_list(document["boundary"]),
                obstacles=tuple(
                    Rect.from_list(values)
                    for values in document.get("obstacles", [])
                ),
                target=Rect.from_list(document["target"]),
                obstacle_margin=float(document.get("obstacle_margin", 0.5)),
                target_margin=float(document.get("target_margin", 0.25)),
                vessel=VesselParams.from_config(document.get("vessel", {})),
                origin_offset=tuple(document.get("origin_offset", (0, 0))),
                footprint_clearance=bool(
                    document.get("footprint_clearance", True)
                ),
                target_heading=(
                    None if target_heading is None else tuple(target_heading)
                ),
                sampling_period=float(document.get("sampling_period", 2.0)),
                config={
                    name: copy.deepcopy(document[name])
                    for name in CONFIG_SECTIONS
                    if name in document
                },
            )
        except InvalidScenario:
            raise
        except KeyError as error:
            raise InvalidScenario(
                f"Scenario document lacks the key {error}"
            ) from None
        except (TypeError, ValueError) as error:
            raise InvalidScenario(f"Malformed scenario: {error}") from None

    def to_config(self) -> Dict[str, Any]:
        document = {
            "boundary": self.boundary.to_list(),
            "obstacles": [obstacle.to_list() for obstacle in self.obstacles],
            "target": self.target.to_list(),
            "obstacle_margin": self.obstacle_margin,
            "target_margin": self.target_margin,
            "origin_offset": list(self.origin_offset),
            "footprint_clearance": self.footprint_clearance,
            "sampling_period": self.sampling_period,
            "vessel": self.vessel.to_config(),
        }
        if self.target_heading is not None:
            document["target_heading"] = list(self.target_heading)
        document.update(copy.deepcopy(self.config))
        return document

    @functools.cached_property
    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON encoding of the scenario."""
        canonical = json.dumps(
            self.to_config(), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


BUNDLED_SCENARIOS = ("basin", "basin_one_obstacle")


def default_scenario_path(name: str = "basin") -> str:
    """Path of a bundled arena.

    ``basin`` is the two-obstacle docking arena, ``basin_one_obstacle`` the
    same arena without the wall obstacle next to the target.
    """
    if name not in BUNDLED_SCENARIOS:
        raise ValueError(
            f"Unknown bundled scenario {name!r}; expected one of "
            f"{BUNDLED_SCENARIOS}"
        )
    return os.path.join(
        os.path.dirname(os.path.dirname(__file__)), "data", f"{name}.json"
    )


def load_scenario(path: Optional[str] = None) -> Scenario:
    """Read a scenario document; the bundled arena when ``path`` is None.

    Raises:
        OSError: If the file cannot be read.
        InvalidScenario: If the document is not a valid scenario.
    """
    if path is None:
        path = default_scenario_path()
    with open(path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as error:
            raise InvalidScenario(
                f"{path} is not valid JSON: {error}"
            ) from None
    if not isinstance(document, dict):
        raise InvalidScenario(f"{path} does not hold a JSON object")
    return Scenario.from_config(document)


def dump_scenario(scenario: Scenario, path: str):
    """Write a scenario document atomically."""
    atomic_write_text(
        path, json.dumps(scenario.to_config(), indent=2, sort_keys=True)
    )

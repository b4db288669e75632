"""Uniform state and input quantization."""

import functools
import itertools
from dataclasses import dataclass
from typing import List, Mapping, NamedTuple, Sequence, Tuple

import numpy as np

from symdock.core.scenario import Rect
from symdock.dynamics import BodyVelocity, Pose, wrap_angle
from symdock.exceptions import OutOfDomain


#: Admissible commanded velocities ``U1``: (lower, upper) per component.
INPUT_BOUNDS = ((-0.1, 0.2), (-0.1, 0.1), (-0.2, 0.2))

_TOLERANCE = 1e-9


class CellId(NamedTuple):
    """Index of an abstract state."""

    ix: int
    iy: int
    ipsi: int


@dataclass(frozen=True)
class Grid:
    """Uniform grid over ``(x, y, psi)``.

    The heading dimension is periodic: it starts at ``-pi`` and its cells
    tile the full turn.

    Args:
        lower: Lower corner ``(x, y, psi)``.
        resolution: Cell widths ``(x, y, psi)``.
        counts: Cells per dimension ``(nx, ny, npsi)``.
    """

    lower: Tuple[float, float, float]
    resolution: Tuple[float, float, float]
    counts: Tuple[int, int, int]

    def __post_init__(self):
        lower = tuple(float(value) for value in self.lower)
        resolution = tuple(float(value) for value in self.resolution)
        counts = tuple(int(value) for value in self.counts)
        if len(lower) != 3 or len(resolution) != 3 or len(counts) != 3:
            raise ValueError("Grids are three-dimensional")
        if min(resolution) <= 0 or min(counts) < 1:
            raise ValueError(
                "Cell widths and counts must be positive, got "
                f"resolution={resolution}, counts={counts}"
            )
        if abs(lower[2] + np.pi) > _TOLERANCE:
            raise ValueError(
                f"The heading dimension starts at -pi, got {lower[2]}"
            )
        if abs(counts[2] * resolution[2] - 2 * np.pi) > _TOLERANCE:
            raise ValueError(
                "Heading cells must tile the full turn, got "
                f"{counts[2]} cells of {resolution[2]} rad"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "resolution", resolution)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_boundary(
        cls,
        boundary: Rect,
        resolution: Sequence[float] = (0.25, 0.25),
        headings: int = 32,
    ) -> "Grid":
        """Grid whose position cells tile ``boundary`` exactly."""
        counts = []
        for extent, width in zip(
            (boundary.width, boundary.height), resolution
        ):
            count = int(round(extent / width))
            if count < 1 or abs(count * width - extent) > _TOLERANCE:
                raise ValueError(
                    f"A cell width of {width} does not tile an extent of "
                    f"{extent}"
                )
            counts.append(count)
        return cls(
            lower=(boundary.x_min, boundary.y_min, -np.pi),
            resolution=(
                boundary.width / counts[0],
                boundary.height / counts[1],
                2 * np.pi / headings,
            ),
            counts=(counts[0], counts[1], headings),
        )

    @classmethod
    def from_config(cls, config: Mapping, boundary: Rect) -> "Grid":
        """Build the grid from the ``grid`` section of a scenario."""
        return cls.from_boundary(
            boundary,
            resolution=config.get("resolution", (0.25, 0.25)),
            headings=int(config.get("headings", 32)),
        )

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.counts

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def upper(self) -> Tuple[float, float, float]:
        return tuple(
            lower + count * width
            for lower, count, width in zip(
                self.lower, self.counts, self.resolution
            )
        )

    @property
    def half_widths(self) -> np.ndarray:
        return 0.5 * np.asarray(self.resolution)

    def flat_index(self, cell: CellId) -> int:
        return int(np.ravel_multi_index(tuple(cell), self.counts))

    def cell_from_flat(self, index: int) -> CellId:
        return CellId(*map(int, np.unravel_index(index, self.counts)))

    def contains_position(self, x: float, y: float) -> bool:
        upper = self.upper
        return (
            self.lower[0] <= x <= upper[0] and self.lower[1] <= y <= upper[1]
        )

    def quantize_array(self, poses) -> np.ndarray:
        """Vectorized :meth:`quantize` over a ``k x 3`` array.

        Returns:
            A ``k x 3`` integer array of cell indices.

        Raises:
            OutOfDomain: If any position lies outside the grid.
        """
        poses = np.atleast_2d(np.asarray(poses, dtype=float))
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        positions = poses[:, :2]
        outside = np.any(
            (positions < lower[:2]) | (positions > upper[:2]), axis=1
        )
        if np.any(outside):
            raise OutOfDomain(
                f"Position {tuple(positions[np.argmax(outside)])} lies "
                f"outside [{lower[0]}, {upper[0]}] x [{lower[1]}, {upper[1]}]"
            )
        shifted = np.column_stack(
            [positions - lower[:2], wrap_angle(poses[:, 2]) + np.pi]
        )
        indices = np.floor(shifted / np.asarray(self.resolution)).astype(int)
        # States on the upper boundary belong to the last cell.
        return np.clip(indices, 0, np.asarray(self.counts) - 1)

    def quantize(self, eta: Pose) -> CellId:
        """Cell containing ``eta``.

        Raises:
            OutOfDomain: If ``(x, y)`` lies outside the grid.
        """
        return CellId(*map(int, self.quantize_array(eta.to_array())[0]))

    def cell_center(self, cell: CellId) -> Pose:
        ix, iy, ipsi = cell
        for index, count in zip(cell, self.counts):
            if not 0 <= index < count:
                raise ValueError(f"Cell {tuple(cell)} is outside the grid")
        x0, y0, psi0 = self.lower
        wx, wy, wpsi = self.resolution
        return Pose(
            x0 + (ix + 0.5) * wx,
            y0 + (iy + 0.5) * wy,
            psi0 + (ipsi + 0.5) * wpsi,
        )

    def axis_centers(self, axis: int) -> np.ndarray:
        """Cell centers along one dimension."""
        return self.lower[axis] + (
            np.arange(self.counts[axis]) + 0.5
        ) * self.resolution[axis]

    def axis_edges(self, axis: int) -> np.ndarray:
        """Cell edges along one dimension (``count + 1`` values)."""
        return self.lower[axis] + np.arange(
            self.counts[axis] + 1
        ) * self.resolution[axis]

    def describe(self) -> str:
        return (
            f"lower={list(self.lower)} resolution={list(self.resolution)} "
            f"counts={list(self.counts)}"
        )


def quantize(eta: Pose, grid: Grid) -> CellId:
    """Cell containing ``eta`` (see :meth:`Grid.quantize`)."""
    return grid.quantize(eta)


def cell_center(cell: CellId, grid: Grid) -> Pose:
    """Geometric center of ``cell`` (see :meth:`Grid.cell_center`)."""
    return grid.cell_center(cell)


@dataclass(frozen=True)
class InputGrid:
    """Finite set of commanded body velocities.

    Inputs are indexed surge-major, then sway, then yaw rate; this order is
    the tie-breaking order throughout synthesis and selection.
    """

    surge: Tuple[float, ...] = (-0.1, 0.0, 0.1, 0.2)
    sway: Tuple[float, ...] = (-0.1, 0.0, 0.1)
    yaw: Tuple[float, ...] = (-0.2, -0.1, 0.0, 0.1, 0.2)

    def __post_init__(self):
        for name, values, (lower, upper) in zip(
            ("surge", "sway", "yaw"),
            (self.surge, self.sway, self.yaw),
            INPUT_BOUNDS,
        ):
            values = tuple(float(value) for value in values)
            if not values:
                raise ValueError(f"The {name} input list is empty")
            if len(set(values)) != len(values):
                raise ValueError(f"The {name} inputs repeat a value")
            for value in values:
                if not lower - _TOLERANCE <= value <= upper + _TOLERANCE:
                    raise ValueError(
                        f"{name} input {value} lies outside [{lower}, {upper}]"
                    )
            object.__setattr__(self, name, values)

    @classmethod
    def from_config(cls, config: Mapping) -> "InputGrid":
        defaults = cls()
        return cls(
            surge=tuple(config.get("surge", defaults.surge)),
            sway=tuple(config.get("sway", defaults.sway)),
            yaw=tuple(config.get("yaw", defaults.yaw)),
        )

    def __len__(self):
        return len(self.surge) * len(self.sway) * len(self.yaw)

    @functools.cached_property
    def values(self) -> np.ndarray:
        """``n x 3`` array of inputs in index order (read-only)."""
        values = np.array(
            list(itertools.product(self.surge, self.sway, self.yaw)),
            dtype=float,
        )
        values.flags.writeable = False
        return values

    def velocity(self, index: int) -> BodyVelocity:
        return BodyVelocity.from_array(self.values[index])

    def velocities(self) -> List[BodyVelocity]:
        return [BodyVelocity.from_array(row) for row in self.values]

    def index_of(self, velocity: BodyVelocity) -> int:
        """Index of an input value.

        Raises:
            ValueError: If ``velocity`` is not on the grid.
        """
        matches = np.flatnonzero(
            np.all(
                np.abs(self.values - velocity.to_array()) <= _TOLERANCE,
                axis=1,
            )
        )
        if matches.size == 0:
            raise ValueError(f"{velocity} is not an input of this grid")
        return int(matches[0])

    def describe(self) -> str:
        return (
            f"surge={list(self.surge)} sway={list(self.sway)} "
            f"yaw={list(self.yaw)}"
        )
